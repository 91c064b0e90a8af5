#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vada/error.hpp"
#include "vada/value.hpp"

namespace vada {

struct Term {
    enum class Kind { Constant, Variable, LabelledNull };

    Kind kind = Kind::Constant;
    Value value;       // Constant, LabelledNull
    std::string name;  // Variable

    static Term constant(Value v) { return {Kind::Constant, std::move(v), {}}; }
    static Term variable(std::string n) { return {Kind::Variable, {}, std::move(n)}; }

    bool is_variable() const { return kind == Kind::Variable; }
    bool operator==(const Term& other) const;
};

enum class UnaryOp { Negate, Not };
enum class BinaryOp { Add, Sub, Mul, Div, Pow, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

std::string_view to_string(BinaryOp op);
bool is_comparison(BinaryOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression tree. Children are shared, so copying a rule is cheap.
struct Expr {
    enum class Kind { Literal, Variable, Unary, Binary, Call };

    Kind kind = Kind::Literal;
    Value value;             // Literal
    std::string name;        // Variable name or function name
    std::string ns;          // Call namespace ("" when unqualified)
    UnaryOp unary_op = UnaryOp::Negate;
    BinaryOp binary_op = BinaryOp::Add;
    std::vector<ExprPtr> args;
    SourceSpan span;

    static ExprPtr literal(Value v, SourceSpan span = {});
    static ExprPtr variable(std::string name, SourceSpan span = {});
    static ExprPtr unary(UnaryOp op, ExprPtr operand, SourceSpan span = {});
    static ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span = {});
    static ExprPtr call(std::string ns, std::string name, std::vector<ExprPtr> args, SourceSpan span = {});

    /// Structural equality; spans are ignored.
    bool equals(const Expr& other) const;
    void collect_variables(std::set<std::string>& out) const;
    std::set<std::string> variables() const;
};

bool equal_exprs(const ExprPtr& a, const ExprPtr& b);

struct Atom {
    std::string predicate;
    std::vector<Term> args;
    SourceSpan span;

    size_t arity() const { return args.size(); }
    bool is_ground() const;
    std::set<std::string> variables() const;
    bool operator==(const Atom& other) const { return predicate == other.predicate && args == other.args; }
};

enum class AggregateOp { MSum, MCount, MProd, Min, Max };
std::string_view to_string(AggregateOp op);
std::optional<AggregateOp> aggregate_from_name(std::string_view name);

struct AggregateCall {
    AggregateOp op = AggregateOp::MSum;
    ExprPtr argument;
};

/// `Var = expr` or `Var = aggregate(expr)` in a rule body.
struct Assignment {
    std::string variable;
    ExprPtr expr;                          // set when not an aggregate
    std::optional<AggregateCall> aggregate;
    SourceSpan span;

    bool is_aggregate() const { return aggregate.has_value(); }
    const ExprPtr& value_expr() const { return aggregate ? aggregate->argument : expr; }
    bool operator==(const Assignment& other) const;
};

struct Rule {
    Atom head;
    /// Head variables that occur nowhere in the body, in order of first appearance.
    std::vector<std::string> existential_vars;
    std::vector<Atom> body;
    std::vector<Atom> negated;
    std::vector<ExprPtr> conditions;
    std::vector<Assignment> assignments;
    std::optional<double> weight;
    SourceSpan span;

    bool is_soft() const { return weight.has_value(); }
    const Assignment* aggregate() const;
    /// Variables bound by positive body atoms.
    std::set<std::string> body_variables() const;
    bool operator==(const Rule& other) const;
};

struct Annotation {
    enum class Kind { Input, Output, Bind, QBind, Mapping, Post, Library };

    Kind kind = Kind::Input;
    std::vector<Value> args;
    SourceSpan span;

    /// First argument as a string (the predicate name for most kinds).
    std::string target() const;
    bool operator==(const Annotation& other) const { return kind == other.kind && args == other.args; }
};

std::string_view to_string(Annotation::Kind kind);
std::optional<Annotation::Kind> annotation_from_name(std::string_view name);

struct Program {
    std::vector<Rule> rules;
    std::vector<Atom> facts;
    std::vector<Annotation> annotations;

    /// Predicate name to arity, over every atom in the program.
    std::map<std::string, size_t> arities() const;
    std::vector<const Annotation*> annotations_of(Annotation::Kind kind) const;
    std::set<std::string> output_predicates() const;
    std::set<std::string> input_predicates() const;

    bool operator==(const Program& other) const;
};

}  // namespace vada
