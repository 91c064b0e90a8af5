#include "vada/ast.hpp"

#include <algorithm>

namespace vada {

bool Term::operator==(const Term& other) const {
    if (kind != other.kind) return false;
    if (kind == Kind::Variable) return name == other.name;
    return value == other.value;
}

std::string_view to_string(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Pow: return "^";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::And: return "and";
        case BinaryOp::Or: return "or";
    }
    return "?";
}

bool is_comparison(BinaryOp op) {
    switch (op) {
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge:
        case BinaryOp::Eq:
        case BinaryOp::Ne: return true;
        default: return false;
    }
}

ExprPtr Expr::literal(Value v, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Literal;
    e->value = std::move(v);
    e->span = span;
    return e;
}

ExprPtr Expr::variable(std::string name, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Variable;
    e->name = std::move(name);
    e->span = span;
    return e;
}

ExprPtr Expr::unary(UnaryOp op, ExprPtr operand, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Unary;
    e->unary_op = op;
    e->args.push_back(std::move(operand));
    e->span = span;
    return e;
}

ExprPtr Expr::binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Binary;
    e->binary_op = op;
    e->args.push_back(std::move(lhs));
    e->args.push_back(std::move(rhs));
    e->span = span;
    return e;
}

ExprPtr Expr::call(std::string ns, std::string name, std::vector<ExprPtr> args, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Call;
    e->ns = std::move(ns);
    e->name = std::move(name);
    e->args = std::move(args);
    e->span = span;
    return e;
}

bool Expr::equals(const Expr& other) const {
    if (kind != other.kind || args.size() != other.args.size()) return false;
    switch (kind) {
        case Kind::Literal:
            if (!(value == other.value)) return false;
            break;
        case Kind::Variable:
            if (name != other.name) return false;
            break;
        case Kind::Unary:
            if (unary_op != other.unary_op) return false;
            break;
        case Kind::Binary:
            if (binary_op != other.binary_op) return false;
            break;
        case Kind::Call:
            if (ns != other.ns || name != other.name) return false;
            break;
    }
    for (size_t i = 0; i < args.size(); ++i)
        if (!equal_exprs(args[i], other.args[i])) return false;
    return true;
}

void Expr::collect_variables(std::set<std::string>& out) const {
    if (kind == Kind::Variable) out.insert(name);
    for (const auto& a : args) a->collect_variables(out);
}

std::set<std::string> Expr::variables() const {
    std::set<std::string> out;
    collect_variables(out);
    return out;
}

bool equal_exprs(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return a->equals(*b);
}

bool Atom::is_ground() const {
    return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

std::set<std::string> Atom::variables() const {
    std::set<std::string> out;
    for (const auto& t : args)
        if (t.is_variable()) out.insert(t.name);
    return out;
}

std::string_view to_string(AggregateOp op) {
    switch (op) {
        case AggregateOp::MSum: return "msum";
        case AggregateOp::MCount: return "mcount";
        case AggregateOp::MProd: return "mprod";
        case AggregateOp::Min: return "min";
        case AggregateOp::Max: return "max";
    }
    return "?";
}

std::optional<AggregateOp> aggregate_from_name(std::string_view name) {
    if (name == "msum") return AggregateOp::MSum;
    if (name == "mcount") return AggregateOp::MCount;
    if (name == "mprod") return AggregateOp::MProd;
    if (name == "min") return AggregateOp::Min;
    if (name == "max") return AggregateOp::Max;
    return std::nullopt;
}

bool Assignment::operator==(const Assignment& other) const {
    if (variable != other.variable || aggregate.has_value() != other.aggregate.has_value()) return false;
    if (aggregate)
        return aggregate->op == other.aggregate->op && equal_exprs(aggregate->argument, other.aggregate->argument);
    return equal_exprs(expr, other.expr);
}

const Assignment* Rule::aggregate() const {
    for (const auto& a : assignments)
        if (a.is_aggregate()) return &a;
    return nullptr;
}

std::set<std::string> Rule::body_variables() const {
    std::set<std::string> out;
    for (const auto& atom : body)
        for (const auto& t : atom.args)
            if (t.is_variable()) out.insert(t.name);
    return out;
}

bool Rule::operator==(const Rule& other) const {
    if (!(head == other.head) || existential_vars != other.existential_vars || body != other.body ||
        negated != other.negated || assignments != other.assignments || weight != other.weight)
        return false;
    if (conditions.size() != other.conditions.size()) return false;
    for (size_t i = 0; i < conditions.size(); ++i)
        if (!equal_exprs(conditions[i], other.conditions[i])) return false;
    return true;
}

std::string Annotation::target() const {
    if (args.empty()) return {};
    return args.front().to_plain();
}

std::string_view to_string(Annotation::Kind kind) {
    switch (kind) {
        case Annotation::Kind::Input: return "input";
        case Annotation::Kind::Output: return "output";
        case Annotation::Kind::Bind: return "bind";
        case Annotation::Kind::QBind: return "qbind";
        case Annotation::Kind::Mapping: return "mapping";
        case Annotation::Kind::Post: return "post";
        case Annotation::Kind::Library: return "library";
    }
    return "?";
}

std::optional<Annotation::Kind> annotation_from_name(std::string_view name) {
    using K = Annotation::Kind;
    if (name == "input") return K::Input;
    if (name == "output") return K::Output;
    if (name == "bind") return K::Bind;
    if (name == "qbind") return K::QBind;
    if (name == "mapping") return K::Mapping;
    if (name == "post") return K::Post;
    if (name == "library") return K::Library;
    return std::nullopt;
}

std::map<std::string, size_t> Program::arities() const {
    std::map<std::string, size_t> out;
    auto note = [&](const Atom& a) { out.emplace(a.predicate, a.arity()); };
    for (const auto& f : facts) note(f);
    for (const auto& r : rules) {
        note(r.head);
        for (const auto& a : r.body) note(a);
        for (const auto& a : r.negated) note(a);
    }
    return out;
}

std::vector<const Annotation*> Program::annotations_of(Annotation::Kind kind) const {
    std::vector<const Annotation*> out;
    for (const auto& a : annotations)
        if (a.kind == kind) out.push_back(&a);
    return out;
}

std::set<std::string> Program::output_predicates() const {
    std::set<std::string> out;
    for (const auto* a : annotations_of(Annotation::Kind::Output)) out.insert(a->target());
    return out;
}

std::set<std::string> Program::input_predicates() const {
    std::set<std::string> out;
    for (const auto* a : annotations_of(Annotation::Kind::Input)) out.insert(a->target());
    return out;
}

bool Program::operator==(const Program& other) const {
    return rules == other.rules && facts == other.facts && annotations == other.annotations;
}

}  // namespace vada
