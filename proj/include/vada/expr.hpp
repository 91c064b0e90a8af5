#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "vada/ast.hpp"

namespace vada {

using Function = std::function<Value(std::span<const Value>)>;

/// Built-in functions grouped in named libraries ("math", "string", "date", "set").
/// Every built-in is also reachable without a namespace.
class FunctionRegistry {
public:
    static const FunctionRegistry& builtins();

    void add(const std::string& library, const std::string& name, Function fn);
    const Function* find(std::string_view library, std::string_view name) const;
    bool has_library(std::string_view library) const;

private:
    std::map<std::string, Function, std::less<>> qualified_;
    std::map<std::string, Function, std::less<>> unqualified_;
    std::map<std::string, int, std::less<>> libraries_;
};

/// Variable lookup during evaluation; returns nullptr for unbound names.
class Scope {
public:
    virtual ~Scope() = default;
    virtual const Value* lookup(std::string_view name) const = 0;
};

struct EvalContext {
    const FunctionRegistry* functions = &FunctionRegistry::builtins();
    /// Namespace prefix (without ':') to library name, from @library.
    std::map<std::string, std::string, std::less<>> aliases;
};

/// Evaluates a ground expression. Throws EvalError on unbound variables,
/// type errors, unknown functions or undefined arithmetic.
Value evaluate(const Expr& expr, const Scope& scope, const EvalContext& ctx);
bool evaluate_condition(const Expr& expr, const Scope& scope, const EvalContext& ctx);

namespace arith {

Value add(const Value& a, const Value& b, SourceSpan span = {});
Value sub(const Value& a, const Value& b, SourceSpan span = {});
Value mul(const Value& a, const Value& b, SourceSpan span = {});
Value div(const Value& a, const Value& b, SourceSpan span = {});
/// Three-way comparison for ordered types; throws EvalError when incomparable.
int compare(const Value& a, const Value& b, SourceSpan span = {});
/// Equality with numeric widening (1 == 1.0).
bool loosely_equal(const Value& a, const Value& b);

}  // namespace arith

}  // namespace vada
