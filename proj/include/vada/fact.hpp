#pragma once

#include <string>

#include "vada/ast.hpp"
#include "vada/value.hpp"

namespace vada {

/// A ground atom; arguments may include labelled nulls.
struct Fact {
    std::string predicate;
    Tuple args;

    /// `own("a", "c", 0.5)`
    std::string to_string() const;
    bool operator==(const Fact&) const = default;
    auto operator<=>(const Fact&) const = default;
};

struct FactHash {
    size_t operator()(const Fact& f) const;
};

/// Throws EvalError if the atom contains a variable.
Fact fact_from_atom(const Atom& atom);

}  // namespace vada
