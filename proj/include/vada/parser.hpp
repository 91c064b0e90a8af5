#pragma once

#include <string>
#include <string_view>

#include "vada/ast.hpp"

namespace vada {

/// Parses a program in code notation. Throws ParseError (syntax) or
/// ArityError (inconsistent predicate arity).
Program parse_program(std::string_view text);

/// Parses a single atom such as `controls("A","C")` or `linked("a",X)`.
/// A trailing '.' is accepted.
Atom parse_atom(std::string_view text);

/// Canonical source text; `parse_program(format_program(p)) == p`.
std::string format_program(const Program& program);
std::string format_rule(const Rule& rule);
std::string format_atom(const Atom& atom);
std::string format_expr(const Expr& expr);
std::string format_annotation(const Annotation& annotation);

}  // namespace vada
