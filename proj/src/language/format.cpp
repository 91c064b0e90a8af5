#include "vada/parser.hpp"

namespace vada {

namespace {

constexpr int kPrimary = 9;

int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Literal:
        case Expr::Kind::Variable:
        case Expr::Kind::Call: return kPrimary;
        case Expr::Kind::Unary: return e.unary_op == UnaryOp::Not ? 3 : 7;
        case Expr::Kind::Binary:
            switch (e.binary_op) {
                case BinaryOp::Or: return 1;
                case BinaryOp::And: return 2;
                case BinaryOp::Add:
                case BinaryOp::Sub: return 5;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 6;
                case BinaryOp::Pow: return 8;
                default: return 4;
            }
    }
    return kPrimary;
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& child, bool parens, std::string& out) {
    if (parens) out += '(';
    print(child, out);
    if (parens) out += ')';
}

void print(const Expr& e, std::string& out) {
    switch (e.kind) {
        case Expr::Kind::Literal: out += e.value.to_literal(); return;
        case Expr::Kind::Variable: out += e.name; return;
        case Expr::Kind::Call:
            if (!e.ns.empty()) out += e.ns + ":";
            out += e.name + "(";
            for (size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                print(*e.args[i], out);
            }
            out += ')';
            return;
        case Expr::Kind::Unary: {
            const Expr& operand = *e.args[0];
            if (e.unary_op == UnaryOp::Not) {
                out += "not ";
                print_child(operand, precedence(operand) < 3, out);
            } else {
                out += '-';
                print_child(operand, precedence(operand) < 7, out);
            }
            return;
        }
        case Expr::Kind::Binary: {
            int p = precedence(e);
            const Expr& lhs = *e.args[0];
            const Expr& rhs = *e.args[1];
            bool lparen, rparen;
            if (e.binary_op == BinaryOp::Pow) {
                lparen = precedence(lhs) < kPrimary;
                rparen = precedence(rhs) < 7;
            } else if (p == 4) {
                lparen = precedence(lhs) <= p;
                rparen = precedence(rhs) <= p;
            } else {
                lparen = precedence(lhs) < p;
                rparen = precedence(rhs) <= p;
            }
            print_child(lhs, lparen, out);
            out += ' ';
            out += to_string(e.binary_op);
            out += ' ';
            print_child(rhs, rparen, out);
            return;
        }
    }
}

std::string format_term(const Term& t) {
    return t.is_variable() ? t.name : t.value.to_literal();
}

}  // namespace

std::string format_expr(const Expr& expr) {
    std::string out;
    print(expr, out);
    return out;
}

std::string format_atom(const Atom& atom) {
    std::string out = atom.predicate + "(";
    for (size_t i = 0; i < atom.args.size(); ++i) {
        if (i) out += ", ";
        out += format_term(atom.args[i]);
    }
    return out + ")";
}

std::string format_rule(const Rule& rule) {
    std::string out;
    if (rule.weight) out += format_double(*rule.weight) + " :: ";
    out += format_atom(rule.head) + " :- ";
    std::vector<std::string> items;
    for (const auto& a : rule.body) items.push_back(format_atom(a));
    for (const auto& a : rule.negated) items.push_back("not " + format_atom(a));
    for (const auto& a : rule.assignments) {
        std::string s = a.variable + " = ";
        if (a.aggregate)
            s += std::string(to_string(a.aggregate->op)) + "(" + format_expr(*a.aggregate->argument) + ")";
        else
            s += format_expr(*a.expr);
        items.push_back(std::move(s));
    }
    for (const auto& c : rule.conditions) items.push_back(format_expr(*c));
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out + ".";
}

std::string format_annotation(const Annotation& a) {
    std::string out = "@" + std::string(to_string(a.kind)) + "(";
    for (size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ", ";
        out += a.args[i].to_literal();
    }
    return out + ").";
}

std::string format_program(const Program& program) {
    std::string out;
    for (const auto& a : program.annotations) out += format_annotation(a) + "\n";
    if (!program.annotations.empty() && (!program.facts.empty() || !program.rules.empty())) out += "\n";
    for (const auto& f : program.facts) out += format_atom(f) + ".\n";
    if (!program.facts.empty() && !program.rules.empty()) out += "\n";
    for (const auto& r : program.rules) out += format_rule(r) + "\n";
    return out;
}

}  // namespace vada
