#include "vada/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace vada {

namespace {

[[noreturn]] void type_error(const std::string& what, SourceSpan span) { throw EvalError(what, span); }

std::string type_of(const Value& v) { return std::string(Value::type_name(v.type())); }

Value checked_double(double d, const char* what, SourceSpan span = {}) {
    if (std::isnan(d)) type_error(std::string(what) + " is undefined for its arguments", span);
    return Value::real(d);
}

void require_numeric(const Value& v, std::string_view op, SourceSpan span) {
    if (!v.is_numeric())
        type_error("operator " + std::string(op) + " expects numbers, got " + type_of(v) + " " + v.to_literal(),
                   span);
}

void arity(std::span<const Value> args, size_t n, const char* fn) {
    if (args.size() != n)
        throw EvalError(std::string(fn) + " expects " + std::to_string(n) + " argument(s), got " +
                        std::to_string(args.size()));
}

double num(const Value& v, const char* fn) {
    if (!v.is_numeric()) throw EvalError(std::string(fn) + " expects a number, got " + type_of(v));
    return v.to_number();
}

const std::string& str(const Value& v, const char* fn) {
    if (v.type() != Value::Type::String) throw EvalError(std::string(fn) + " expects a string, got " + type_of(v));
    return v.as_string();
}

int64_t integer(const Value& v, const char* fn) {
    if (v.type() != Value::Type::Integer)
        throw EvalError(std::string(fn) + " expects an integer, got " + type_of(v));
    return v.as_int();
}

Date date_arg(const Value& v, const char* fn) {
    if (v.type() != Value::Type::Date) throw EvalError(std::string(fn) + " expects a date, got " + type_of(v));
    return v.as_date();
}

Function unary_math(double (*f)(double), const char* name) {
    return [f, name](std::span<const Value> a) {
        arity(a, 1, name);
        return checked_double(f(num(a[0], name)), name);
    };
}

FunctionRegistry make_builtins() {
    FunctionRegistry r;
    // math
    r.add("math", "abs", [](std::span<const Value> a) {
        arity(a, 1, "abs");
        if (a[0].type() == Value::Type::Integer) return Value::integer(std::llabs(a[0].as_int()));
        return Value::real(std::fabs(num(a[0], "abs")));
    });
    r.add("math", "sqrt", [](std::span<const Value> a) {
        arity(a, 1, "sqrt");
        double x = num(a[0], "sqrt");
        if (x < 0) throw EvalError("sqrt of a negative number");
        return Value::real(std::sqrt(x));
    });
    r.add("math", "pow", [](std::span<const Value> a) {
        arity(a, 2, "pow");
        return checked_double(std::pow(num(a[0], "pow"), num(a[1], "pow")), "pow");
    });
    r.add("math", "exp", unary_math(static_cast<double (*)(double)>(std::exp), "exp"));
    r.add("math", "log", [](std::span<const Value> a) {
        arity(a, 1, "log");
        double x = num(a[0], "log");
        if (x <= 0) throw EvalError("log of a non-positive number");
        return Value::real(std::log(x));
    });
    r.add("math", "sin", unary_math(static_cast<double (*)(double)>(std::sin), "sin"));
    r.add("math", "cos", unary_math(static_cast<double (*)(double)>(std::cos), "cos"));
    r.add("math", "floor", [](std::span<const Value> a) {
        arity(a, 1, "floor");
        return Value::integer(static_cast<int64_t>(std::floor(num(a[0], "floor"))));
    });
    r.add("math", "ceil", [](std::span<const Value> a) {
        arity(a, 1, "ceil");
        return Value::integer(static_cast<int64_t>(std::ceil(num(a[0], "ceil"))));
    });
    r.add("math", "round", [](std::span<const Value> a) {
        arity(a, 1, "round");
        return Value::integer(static_cast<int64_t>(std::llround(num(a[0], "round"))));
    });
    auto extremum = [](bool want_max) {
        return [want_max](std::span<const Value> a) {
            if (a.empty()) throw EvalError("min/max expects at least one argument");
            Value best = a[0];
            for (const auto& v : a.subspan(1)) {
                int c = arith::compare(v, best);
                if (want_max ? c > 0 : c < 0) best = v;
            }
            return best;
        };
    };
    r.add("math", "min", extremum(false));
    r.add("math", "max", extremum(true));
    r.add("math", "to_int", [](std::span<const Value> a) {
        arity(a, 1, "to_int");
        if (a[0].type() == Value::Type::String) return Value::integer(std::stoll(a[0].as_string()));
        return Value::integer(static_cast<int64_t>(num(a[0], "to_int")));
    });
    r.add("math", "to_double", [](std::span<const Value> a) {
        arity(a, 1, "to_double");
        if (a[0].type() == Value::Type::String) return Value::real(std::stod(a[0].as_string()));
        return Value::real(num(a[0], "to_double"));
    });

    // string
    r.add("string", "concat", [](std::span<const Value> a) {
        std::string out;
        for (const auto& v : a) out += v.to_plain();
        return Value::string(std::move(out));
    });
    r.add("string", "length", [](std::span<const Value> a) {
        arity(a, 1, "length");
        return Value::integer(static_cast<int64_t>(str(a[0], "length").size()));
    });
    r.add("string", "substring", [](std::span<const Value> a) {
        if (a.size() != 2 && a.size() != 3) throw EvalError("substring expects 2 or 3 arguments");
        const std::string& s = str(a[0], "substring");
        int64_t begin = std::clamp<int64_t>(integer(a[1], "substring"), 0, static_cast<int64_t>(s.size()));
        int64_t end = a.size() == 3 ? integer(a[2], "substring") : static_cast<int64_t>(s.size());
        end = std::clamp<int64_t>(end, begin, static_cast<int64_t>(s.size()));
        return Value::string(s.substr(begin, end - begin));
    });
    r.add("string", "lower", [](std::span<const Value> a) {
        arity(a, 1, "lower");
        std::string s = str(a[0], "lower");
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        return Value::string(std::move(s));
    });
    r.add("string", "upper", [](std::span<const Value> a) {
        arity(a, 1, "upper");
        std::string s = str(a[0], "upper");
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
        return Value::string(std::move(s));
    });
    r.add("string", "contains", [](std::span<const Value> a) {
        arity(a, 2, "contains");
        if (a[0].type() == Value::Type::Set) {
            const auto& s = a[0].as_set();
            return Value::boolean(std::binary_search(s.begin(), s.end(), a[1]));
        }
        return Value::boolean(str(a[0], "contains").find(str(a[1], "contains")) != std::string::npos);
    });
    r.add("string", "starts_with", [](std::span<const Value> a) {
        arity(a, 2, "starts_with");
        return Value::boolean(str(a[0], "starts_with").starts_with(str(a[1], "starts_with")));
    });
    r.add("string", "ends_with", [](std::span<const Value> a) {
        arity(a, 2, "ends_with");
        return Value::boolean(str(a[0], "ends_with").ends_with(str(a[1], "ends_with")));
    });
    r.add("string", "index_of", [](std::span<const Value> a) {
        arity(a, 2, "index_of");
        auto pos = str(a[0], "index_of").find(str(a[1], "index_of"));
        return Value::integer(pos == std::string::npos ? -1 : static_cast<int64_t>(pos));
    });
    r.add("string", "to_string", [](std::span<const Value> a) {
        arity(a, 1, "to_string");
        return Value::string(a[0].to_plain());
    });

    // date
    r.add("date", "date", [](std::span<const Value> a) {
        arity(a, 1, "date");
        auto d = Date::parse(str(a[0], "date"));
        if (!d) throw EvalError("invalid date '" + a[0].as_string() + "', expected YYYY-MM-DD");
        return Value::date(*d);
    });
    r.add("date", "date_add", [](std::span<const Value> a) {
        arity(a, 2, "date_add");
        return Value::date(Date{date_arg(a[0], "date_add").days + static_cast<int32_t>(integer(a[1], "date_add"))});
    });
    r.add("date", "date_diff", [](std::span<const Value> a) {
        arity(a, 2, "date_diff");
        return Value::integer(date_arg(a[0], "date_diff").days - date_arg(a[1], "date_diff").days);
    });
    auto part = [](int which) {
        return [which](std::span<const Value> a) {
            arity(a, 1, "year/month/day");
            std::string s = date_arg(a[0], "year/month/day").to_string();
            if (which == 0) return Value::integer(std::stoll(s.substr(0, 4)));
            if (which == 1) return Value::integer(std::stoll(s.substr(5, 2)));
            return Value::integer(std::stoll(s.substr(8, 2)));
        };
    };
    r.add("date", "year", part(0));
    r.add("date", "month", part(1));
    r.add("date", "day", part(2));

    // set
    r.add("set", "size", [](std::span<const Value> a) {
        arity(a, 1, "size");
        if (a[0].type() != Value::Type::Set) throw EvalError("size expects a set");
        return Value::integer(static_cast<int64_t>(a[0].as_set().size()));
    });
    r.add("set", "union", [](std::span<const Value> a) {
        std::vector<Value> out;
        for (const auto& v : a) {
            if (v.type() != Value::Type::Set) throw EvalError("union expects sets");
            out.insert(out.end(), v.as_set().begin(), v.as_set().end());
        }
        return Value::set(std::move(out));
    });
    r.add("set", "add", [](std::span<const Value> a) {
        arity(a, 2, "add");
        if (a[0].type() != Value::Type::Set) throw EvalError("add expects a set as first argument");
        std::vector<Value> out = a[0].as_set();
        out.push_back(a[1]);
        return Value::set(std::move(out));
    });
    return r;
}

}  // namespace

void FunctionRegistry::add(const std::string& library, const std::string& name, Function fn) {
    libraries_[library] = 1;
    qualified_[library + ":" + name] = fn;
    unqualified_.emplace(name, std::move(fn));
}

const Function* FunctionRegistry::find(std::string_view library, std::string_view name) const {
    if (library.empty()) {
        auto it = unqualified_.find(name);
        return it == unqualified_.end() ? nullptr : &it->second;
    }
    std::string key(library);
    key += ':';
    key += name;
    auto it = qualified_.find(key);
    return it == qualified_.end() ? nullptr : &it->second;
}

bool FunctionRegistry::has_library(std::string_view library) const { return libraries_.count(library) > 0; }

const FunctionRegistry& FunctionRegistry::builtins() {
    static const FunctionRegistry registry = make_builtins();
    return registry;
}

namespace arith {

Value add(const Value& a, const Value& b, SourceSpan span) {
    if (a.type() == Value::Type::String && b.type() == Value::Type::String)
        return Value::string(a.as_string() + b.as_string());
    require_numeric(a, "+", span);
    require_numeric(b, "+", span);
    if (a.type() == Value::Type::Integer && b.type() == Value::Type::Integer) {
        int64_t r;
        if (__builtin_add_overflow(a.as_int(), b.as_int(), &r)) type_error("integer overflow in +", span);
        return Value::integer(r);
    }
    return checked_double(a.to_number() + b.to_number(), "+", span);
}

Value sub(const Value& a, const Value& b, SourceSpan span) {
    require_numeric(a, "-", span);
    require_numeric(b, "-", span);
    if (a.type() == Value::Type::Integer && b.type() == Value::Type::Integer) {
        int64_t r;
        if (__builtin_sub_overflow(a.as_int(), b.as_int(), &r)) type_error("integer overflow in -", span);
        return Value::integer(r);
    }
    return checked_double(a.to_number() - b.to_number(), "-", span);
}

Value mul(const Value& a, const Value& b, SourceSpan span) {
    require_numeric(a, "*", span);
    require_numeric(b, "*", span);
    if (a.type() == Value::Type::Integer && b.type() == Value::Type::Integer) {
        int64_t r;
        if (__builtin_mul_overflow(a.as_int(), b.as_int(), &r)) type_error("integer overflow in *", span);
        return Value::integer(r);
    }
    return checked_double(a.to_number() * b.to_number(), "*", span);
}

Value div(const Value& a, const Value& b, SourceSpan span) {
    require_numeric(a, "/", span);
    require_numeric(b, "/", span);
    if (b.to_number() == 0.0) type_error("division by zero", span);
    return checked_double(a.to_number() / b.to_number(), "/", span);
}

int compare(const Value& a, const Value& b, SourceSpan span) {
    if (a.is_numeric() && b.is_numeric()) {
        double x = a.to_number(), y = b.to_number();
        if (a.type() == Value::Type::Integer && b.type() == Value::Type::Integer)
            return a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    if (a.type() != b.type() || a.type() == Value::Type::Set || a.type() == Value::Type::Null)
        type_error("cannot order " + type_of(a) + " " + a.to_literal() + " against " + type_of(b) + " " +
                       b.to_literal(),
                   span);
    auto c = a <=> b;
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

bool loosely_equal(const Value& a, const Value& b) {
    if (a.is_numeric() && b.is_numeric()) return a.to_number() == b.to_number();
    return a == b;
}

}  // namespace arith

namespace {

bool as_condition(const Value& v, SourceSpan span) {
    if (v.type() != Value::Type::Boolean)
        type_error("condition must be boolean, got " + type_of(v) + " " + v.to_literal(), span);
    return v.as_bool();
}

}  // namespace

Value evaluate(const Expr& e, const Scope& scope, const EvalContext& ctx) {
    switch (e.kind) {
        case Expr::Kind::Literal: return e.value;
        case Expr::Kind::Variable: {
            const Value* v = scope.lookup(e.name);
            if (!v) type_error("unbound variable " + e.name, e.span);
            return *v;
        }
        case Expr::Kind::Unary: {
            Value v = evaluate(*e.args[0], scope, ctx);
            if (e.unary_op == UnaryOp::Not) return Value::boolean(!as_condition(v, e.span));
            require_numeric(v, "-", e.span);
            if (v.type() == Value::Type::Integer) return Value::integer(-v.as_int());
            return Value::real(-v.as_double());
        }
        case Expr::Kind::Binary: {
            BinaryOp op = e.binary_op;
            if (op == BinaryOp::And || op == BinaryOp::Or) {
                bool lhs = as_condition(evaluate(*e.args[0], scope, ctx), e.args[0]->span);
                if (op == BinaryOp::And && !lhs) return Value::boolean(false);
                if (op == BinaryOp::Or && lhs) return Value::boolean(true);
                return Value::boolean(as_condition(evaluate(*e.args[1], scope, ctx), e.args[1]->span));
            }
            Value a = evaluate(*e.args[0], scope, ctx);
            Value b = evaluate(*e.args[1], scope, ctx);
            switch (op) {
                case BinaryOp::Add: return arith::add(a, b, e.span);
                case BinaryOp::Sub: return arith::sub(a, b, e.span);
                case BinaryOp::Mul: return arith::mul(a, b, e.span);
                case BinaryOp::Div: return arith::div(a, b, e.span);
                case BinaryOp::Pow:
                    require_numeric(a, "^", e.span);
                    require_numeric(b, "^", e.span);
                    return checked_double(std::pow(a.to_number(), b.to_number()), "^", e.span);
                case BinaryOp::Eq: return Value::boolean(arith::loosely_equal(a, b));
                case BinaryOp::Ne: return Value::boolean(!arith::loosely_equal(a, b));
                case BinaryOp::Lt: return Value::boolean(arith::compare(a, b, e.span) < 0);
                case BinaryOp::Le: return Value::boolean(arith::compare(a, b, e.span) <= 0);
                case BinaryOp::Gt: return Value::boolean(arith::compare(a, b, e.span) > 0);
                case BinaryOp::Ge: return Value::boolean(arith::compare(a, b, e.span) >= 0);
                default: break;
            }
            type_error("unsupported operator", e.span);
        }
        case Expr::Kind::Call: {
            std::string_view library = e.ns;
            if (!library.empty()) {
                auto alias = ctx.aliases.find(library);
                if (alias != ctx.aliases.end()) library = alias->second;
            }
            const Function* fn = ctx.functions->find(library, e.name);
            if (!fn)
                type_error("unknown function " + (e.ns.empty() ? e.name : e.ns + ":" + e.name), e.span);
            std::vector<Value> args;
            args.reserve(e.args.size());
            for (const auto& a : e.args) args.push_back(evaluate(*a, scope, ctx));
            try {
                return (*fn)(args);
            } catch (const EvalError& err) {
                if (err.span().known()) throw;
                throw EvalError(err.message(), e.span);
            } catch (const std::exception& err) {
                throw EvalError(e.name + ": " + err.what(), e.span);
            }
        }
    }
    type_error("malformed expression", e.span);
}

bool evaluate_condition(const Expr& expr, const Scope& scope, const EvalContext& ctx) {
    return as_condition(evaluate(expr, scope, ctx), expr.span);
}

}  // namespace vada
