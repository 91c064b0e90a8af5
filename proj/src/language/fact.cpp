#include "vada/fact.hpp"

#include <functional>

namespace vada {

std::string Fact::to_string() const {
    std::string out = predicate + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        out += args[i].to_literal();
    }
    return out + ")";
}

size_t FactHash::operator()(const Fact& f) const {
    return std::hash<std::string>{}(f.predicate) * 31 + TupleHash{}(f.args);
}

Fact fact_from_atom(const Atom& atom) {
    Fact f{atom.predicate, {}};
    f.args.reserve(atom.args.size());
    for (const auto& t : atom.args) {
        if (t.is_variable()) throw EvalError("atom " + atom.predicate + " is not ground: variable " + t.name, atom.span);
        f.args.push_back(t.value);
    }
    return f;
}

}  // namespace vada
