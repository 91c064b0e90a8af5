#include "vada/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <tuple>

namespace vada {

namespace {

enum class Tok {
    Ident,
    String,
    Integer,
    Double,
    Boolean,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    ColonDash,
    DoubleColon,
    Colon,
    At,
    Assign,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    AndAnd,
    OrOr,
    End,
};

std::string describe(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::String: return "string";
        case Tok::Integer: return "integer";
        case Tok::Double: return "double";
        case Tok::Boolean: return "boolean";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Comma: return "','";
        case Tok::Dot: return "'.'";
        case Tok::ColonDash: return "':-'";
        case Tok::DoubleColon: return "'::'";
        case Tok::Colon: return "':'";
        case Tok::At: return "'@'";
        case Tok::Assign: return "'='";
        case Tok::Eq: return "'=='";
        case Tok::Ne: return "'!='";
        case Tok::Lt: return "'<'";
        case Tok::Le: return "'<='";
        case Tok::Gt: return "'>'";
        case Tok::Ge: return "'>='";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::Caret: return "'^'";
        case Tok::AndAnd: return "'&&'";
        case Tok::OrOr: return "'||'";
        case Tok::End: return "end of input";
    }
    return "?";
}

struct Token {
    Tok kind = Tok::End;
    std::string text;
    Value value;
    SourceSpan span;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.span.line = line_;
            t.span.column = col_;
            if (pos_ >= src_.size()) {
                t.kind = Tok::End;
                t.span.end_line = line_;
                t.span.end_column = col_;
                out.push_back(std::move(t));
                return out;
            }
            lex_one(t);
            t.span.end_line = line_;
            t.span.end_column = col_;
            out.push_back(std::move(t));
        }
    }

private:
    char peek(size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, SourceSpan{line_, col_, line_, col_ + 1});
    }

    void lex_one(Token& t) {
        char c = peek();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') advance();
            t.kind = Tok::Ident;
            t.text = std::string(src_.substr(start, pos_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            lex_number(t);
            return;
        }
        if (c == '"') {
            lex_string(t);
            return;
        }
        if (c == '#') {
            advance();
            if (peek() == 'T' || peek() == 'F') {
                t.kind = Tok::Boolean;
                t.value = Value::boolean(peek() == 'T');
                t.text = peek() == 'T' ? "#T" : "#F";
                advance();
                return;
            }
            fail("expected #T or #F");
        }
        auto two = [&](char a, char b) { return peek() == a && peek(1) == b; };
        auto emit = [&](Tok k, size_t n) {
            t.kind = k;
            t.text = std::string(src_.substr(pos_, n));
            for (size_t i = 0; i < n; ++i) advance();
        };
        if (two(':', '-')) return emit(Tok::ColonDash, 2);
        if (two(':', ':')) return emit(Tok::DoubleColon, 2);
        if (two('=', '=')) return emit(Tok::Eq, 2);
        if (two('!', '=')) return emit(Tok::Ne, 2);
        if (two('<', '>')) return emit(Tok::Ne, 2);
        if (two('<', '=')) return emit(Tok::Le, 2);
        if (two('>', '=')) return emit(Tok::Ge, 2);
        if (two('&', '&')) return emit(Tok::AndAnd, 2);
        if (two('|', '|')) return emit(Tok::OrOr, 2);
        switch (c) {
            case '(': return emit(Tok::LParen, 1);
            case ')': return emit(Tok::RParen, 1);
            case '[': return emit(Tok::LBracket, 1);
            case ']': return emit(Tok::RBracket, 1);
            case ',': return emit(Tok::Comma, 1);
            case '.': return emit(Tok::Dot, 1);
            case ':': return emit(Tok::Colon, 1);
            case '@': return emit(Tok::At, 1);
            case '=': return emit(Tok::Assign, 1);
            case '<': return emit(Tok::Lt, 1);
            case '>': return emit(Tok::Gt, 1);
            case '+': return emit(Tok::Plus, 1);
            case '-': return emit(Tok::Minus, 1);
            case '*': return emit(Tok::Star, 1);
            case '/': return emit(Tok::Slash, 1);
            case '^': return emit(Tok::Caret, 1);
            default: break;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    void lex_number(Token& t) {
        size_t start = pos_;
        bool is_double = false;
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            is_double = true;
            advance();
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        if ((peek() == 'e' || peek() == 'E') &&
            (std::isdigit(static_cast<unsigned char>(peek(1))) ||
             ((peek(1) == '-' || peek(1) == '+') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
            is_double = true;
            advance();
            if (peek() == '-' || peek() == '+') advance();
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        if (is_double) {
            t.kind = Tok::Double;
            double d = 0;
            auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), d);
            if (ec == std::errc::result_out_of_range) d = HUGE_VAL;
            else if (ec != std::errc()) fail("malformed number '" + t.text + "'");
            t.value = Value::real(d);
        } else {
            t.kind = Tok::Integer;
            int64_t i = 0;
            auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), i);
            if (ec != std::errc()) fail("integer literal out of range '" + t.text + "'");
            t.value = Value::integer(i);
        }
    }

    void lex_string(Token& t) {
        advance();  // opening quote
        std::string out;
        for (;;) {
            if (pos_ >= src_.size()) fail("unterminated string literal");
            char c = peek();
            if (c == '"') {
                advance();
                break;
            }
            if (c == '\\') {
                advance();
                char e = peek();
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: fail(std::string("unknown escape sequence '\\") + e + "'");
                }
                advance();
                continue;
            }
            out += c;
            advance();
        }
        t.kind = Tok::String;
        t.text = out;
        t.value = Value::string(std::move(out));
    }

    std::string_view src_;
    size_t pos_ = 0;
    uint32_t line_ = 1;
    uint32_t col_ = 1;
};

SourceSpan join(const SourceSpan& a, const SourceSpan& b) {
    return SourceSpan{a.line, a.column, b.end_line, b.end_column};
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Program program() {
        Program p;
        while (!at(Tok::End)) statement(p);
        return p;
    }

    Atom single_atom() {
        anonymous_ = false;
        Atom a = atom(/*allow_expr_args=*/false);
        accept(Tok::Dot);
        expect(Tok::End);
        return a;
    }

private:
    bool anonymous_ = true;
    size_t anon_count_ = 0;

    const Token& cur() const { return toks_[pos_]; }
    const Token& ahead(size_t n) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool at_ident(std::string_view text) const { return at(Tok::Ident) && cur().text == text; }

    const Token& take() { return toks_[pos_++]; }

    bool accept(Tok k) {
        if (!at(k)) return false;
        ++pos_;
        return true;
    }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        std::string msg = "expected ";
        for (size_t i = 0; i < expected.size(); ++i) {
            if (i) msg += i + 1 == expected.size() ? " or " : ", ";
            msg += expected[i];
        }
        msg += ", found " + (at(Tok::End) ? describe(Tok::End) : "'" + cur().text + "'");
        throw ParseError(msg, cur().span, std::move(expected));
    }

    const Token& expect(Tok k) {
        if (!at(k)) fail({describe(k)});
        return take();
    }

    void statement(Program& p) {
        if (at(Tok::At)) {
            p.annotations.push_back(annotation());
            return;
        }
        const Token& first = cur();
        std::optional<double> weight;
        if ((at(Tok::Integer) || at(Tok::Double)) && ahead(1).kind == Tok::DoubleColon) {
            double w = take().value.to_number();
            take();
            if (!(w >= 0.0 && w <= 1.0))
                throw ParseError("rule weight must lie in [0,1]", first.span, {});
            weight = w;
        }
        if (!at(Tok::Ident)) fail({"'@'", "atom", "rule weight"});
        Atom head = atom(false);
        if (at(Tok::Dot)) {
            if (weight) throw ParseError("weights are only allowed on rules", first.span, {});
            take();
            for (const auto& t : head.args)
                if (t.is_variable())
                    throw ParseError("fact '" + head.predicate + "' must be ground; found variable " + t.name,
                                     head.span, {});
            p.facts.push_back(std::move(head));
            return;
        }
        if (!at(Tok::ColonDash)) fail({"'.'", "':-'"});
        take();
        Rule r;
        r.head = std::move(head);
        r.weight = weight;
        for (;;) {
            body_item(r);
            if (accept(Tok::Comma)) continue;
            if (at(Tok::Dot)) break;
            fail({"','", "'.'"});
        }
        const Token& dot = take();
        r.span = join(first.span, dot.span);
        finish_rule(r);
        p.rules.push_back(std::move(r));
    }

    void finish_rule(Rule& r) {
        std::set<std::string> bound = r.body_variables();
        int aggregates = 0;
        for (const auto& a : r.assignments) {
            bound.insert(a.variable);
            if (a.is_aggregate() && ++aggregates > 1)
                throw ParseError("at most one aggregate per rule", a.span, {});
        }
        for (const auto& t : r.head.args)
            if (t.is_variable() && !bound.count(t.name) &&
                std::find(r.existential_vars.begin(), r.existential_vars.end(), t.name) == r.existential_vars.end())
                r.existential_vars.push_back(t.name);
    }

    Annotation annotation() {
        const Token& at_tok = expect(Tok::At);
        if (!at(Tok::Ident)) fail({"annotation name"});
        const Token& name = take();
        auto kind = annotation_from_name(name.text);
        if (!kind) throw ParseError("unknown annotation '@" + name.text + "'", name.span, {});
        Annotation a;
        a.kind = *kind;
        expect(Tok::LParen);
        for (;;) {
            a.args.push_back(literal());
            if (accept(Tok::Comma)) continue;
            if (at(Tok::RParen)) break;
            fail({"','", "')'"});
        }
        take();
        const Token& dot = expect(Tok::Dot);
        a.span = join(at_tok.span, dot.span);
        validate(a, name);
        return a;
    }

    void validate(const Annotation& a, const Token& name) {
        using K = Annotation::Kind;
        size_t lo = 1, hi = 1;
        switch (a.kind) {
            case K::Input:
            case K::Output: lo = hi = 1; break;
            case K::Bind: lo = 3, hi = 4; break;
            case K::QBind: lo = 3, hi = SIZE_MAX; break;
            case K::Mapping: lo = hi = 4; break;
            case K::Post:
            case K::Library: lo = hi = 2; break;
        }
        size_t n = a.args.size();
        if (n < lo || n > hi) {
            std::string want = lo == hi ? std::to_string(lo)
                                        : (hi == SIZE_MAX ? "at least " + std::to_string(lo)
                                                          : std::to_string(lo) + " to " + std::to_string(hi));
            throw ParseError("@" + name.text + " takes " + want + " arguments, found " + std::to_string(n), a.span,
                             {});
        }
        for (size_t i = 0; i < n; ++i) {
            bool want_int = a.kind == K::Mapping && i == 1;
            auto t = a.args[i].type();
            if (want_int ? t != Value::Type::Integer : (t != Value::Type::String && a.kind != K::QBind))
                throw ParseError("@" + name.text + " argument " + std::to_string(i + 1) + " must be " +
                                     (want_int ? "an integer" : "a string"),
                                 a.span, {});
        }
    }

    Value literal() {
        if (at(Tok::String) || at(Tok::Integer) || at(Tok::Double) || at(Tok::Boolean)) return take().value;
        if (at(Tok::Minus) && (ahead(1).kind == Tok::Integer || ahead(1).kind == Tok::Double)) {
            take();
            const Token& n = take();
            if (n.kind == Tok::Integer) return Value::integer(-n.value.as_int());
            return Value::real(-n.value.as_double());
        }
        if (at(Tok::LBracket)) {
            take();
            std::vector<Value> elems;
            if (!at(Tok::RBracket)) {
                for (;;) {
                    elems.push_back(literal());
                    if (accept(Tok::Comma)) continue;
                    break;
                }
            }
            expect(Tok::RBracket);
            return Value::set(std::move(elems));
        }
        fail({"literal"});
    }

    Term term() {
        if (at(Tok::Ident)) {
            std::string name = take().text;
            // each `_` in a rule is its own variable; a query keeps it as a wildcard
            if (name == "_" && anonymous_) name = "_" + std::to_string(++anon_count_);
            return Term::variable(std::move(name));
        }
        return Term::constant(literal());
    }

    Atom atom(bool /*allow_expr_args*/) {
        const Token& name = expect(Tok::Ident);
        Atom a;
        a.predicate = name.text;
        expect(Tok::LParen);
        if (!at(Tok::RParen)) {
            for (;;) {
                if (!(at(Tok::Ident) || at(Tok::String) || at(Tok::Integer) || at(Tok::Double) ||
                      at(Tok::Boolean) || at(Tok::Minus) || at(Tok::LBracket)))
                    fail({"variable", "constant"});
                a.args.push_back(term());
                if (accept(Tok::Comma)) continue;
                if (at(Tok::RParen)) break;
                fail({"','", "')'"});
            }
        }
        const Token& close = take();
        a.span = join(name.span, close.span);
        return a;
    }

    // Atom-shaped body item: IDENT '(' terms ')' followed by ',' or '.'.
    bool looks_like_atom() const {
        if (!at(Tok::Ident) || ahead(1).kind != Tok::LParen) return false;
        size_t i = pos_ + 2;
        int depth = 0;
        for (; i < toks_.size(); ++i) {
            Tok k = toks_[i].kind;
            if (k == Tok::LBracket) ++depth;
            else if (k == Tok::RBracket) --depth;
            else if (k == Tok::RParen && depth == 0) break;
            else if (depth == 0 && !(k == Tok::Ident || k == Tok::String || k == Tok::Integer ||
                                     k == Tok::Double || k == Tok::Boolean || k == Tok::Minus ||
                                     k == Tok::Comma))
                return false;
            else if (k == Tok::End) return false;
        }
        if (i >= toks_.size()) return false;
        Tok after = i + 1 < toks_.size() ? toks_[i + 1].kind : Tok::End;
        return after == Tok::Comma || after == Tok::Dot;
    }

    void body_item(Rule& r) {
        if (at_ident("not") && ahead(1).kind == Tok::Ident && ahead(2).kind == Tok::LParen) {
            size_t save = pos_;
            ++pos_;
            if (looks_like_atom()) {
                r.negated.push_back(atom(false));
                return;
            }
            pos_ = save;
        }
        if (at(Tok::Ident) && ahead(1).kind == Tok::Assign) {
            const Token& var = take();
            take();
            Assignment a;
            a.variable = var.text;
            if (at(Tok::Ident) && ahead(1).kind == Tok::LParen && aggregate_from_name(cur().text)) {
                a.aggregate = AggregateCall{*aggregate_from_name(take().text), nullptr};
                take();
                a.aggregate->argument = expr();
                const Token& close = expect(Tok::RParen);
                a.span = join(var.span, close.span);
            } else {
                a.expr = expr();
                a.span = join(var.span, toks_[pos_ - 1].span);
            }
            r.assignments.push_back(std::move(a));
            return;
        }
        if (looks_like_atom()) {
            r.body.push_back(atom(false));
            return;
        }
        if (at(Tok::Comma) || at(Tok::Dot) || at(Tok::End)) fail({"atom", "condition", "assignment"});
        r.conditions.push_back(expr());
    }

    // ---- expressions ----

    ExprPtr expr() { return or_expr(); }

    ExprPtr or_expr() {
        ExprPtr lhs = and_expr();
        while (at_ident("or") || at(Tok::OrOr)) {
            take();
            ExprPtr rhs = and_expr();
            SourceSpan s = join(lhs->span, rhs->span);
            lhs = Expr::binary(BinaryOp::Or, lhs, rhs, s);
        }
        return lhs;
    }

    ExprPtr and_expr() {
        ExprPtr lhs = not_expr();
        while (at_ident("and") || at(Tok::AndAnd)) {
            take();
            ExprPtr rhs = not_expr();
            SourceSpan s = join(lhs->span, rhs->span);
            lhs = Expr::binary(BinaryOp::And, lhs, rhs, s);
        }
        return lhs;
    }

    ExprPtr not_expr() {
        if (at_ident("not")) {
            const Token& t = take();
            ExprPtr operand = not_expr();
            return Expr::unary(UnaryOp::Not, operand, join(t.span, operand->span));
        }
        return cmp_expr();
    }

    ExprPtr cmp_expr() {
        ExprPtr lhs = add_expr();
        static const std::map<Tok, BinaryOp> ops = {{Tok::Lt, BinaryOp::Lt}, {Tok::Le, BinaryOp::Le},
                                                    {Tok::Gt, BinaryOp::Gt}, {Tok::Ge, BinaryOp::Ge},
                                                    {Tok::Eq, BinaryOp::Eq}, {Tok::Ne, BinaryOp::Ne}};
        auto it = ops.find(cur().kind);
        if (it == ops.end()) return lhs;
        take();
        ExprPtr rhs = add_expr();
        return Expr::binary(it->second, lhs, rhs, join(lhs->span, rhs->span));
    }

    ExprPtr add_expr() {
        ExprPtr lhs = mul_expr();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            BinaryOp op = take().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            ExprPtr rhs = mul_expr();
            lhs = Expr::binary(op, lhs, rhs, join(lhs->span, rhs->span));
        }
        return lhs;
    }

    ExprPtr mul_expr() {
        ExprPtr lhs = unary_expr();
        while (at(Tok::Star) || at(Tok::Slash)) {
            BinaryOp op = take().kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
            ExprPtr rhs = unary_expr();
            lhs = Expr::binary(op, lhs, rhs, join(lhs->span, rhs->span));
        }
        return lhs;
    }

    ExprPtr unary_expr() {
        if (at(Tok::Minus)) {
            const Token& t = take();
            ExprPtr operand = unary_expr();
            return Expr::unary(UnaryOp::Negate, operand, join(t.span, operand->span));
        }
        return pow_expr();
    }

    ExprPtr pow_expr() {
        ExprPtr base = primary();
        if (at(Tok::Caret)) {
            take();
            ExprPtr exponent = unary_expr();
            return Expr::binary(BinaryOp::Pow, base, exponent, join(base->span, exponent->span));
        }
        return base;
    }

    ExprPtr primary() {
        if (at(Tok::String) || at(Tok::Integer) || at(Tok::Double) || at(Tok::Boolean) || at(Tok::LBracket)) {
            SourceSpan s = cur().span;
            Value v = literal();
            return Expr::literal(std::move(v), join(s, toks_[pos_ - 1].span));
        }
        if (at(Tok::LParen)) {
            take();
            ExprPtr inner = expr();
            expect(Tok::RParen);
            return inner;
        }
        if (at(Tok::Ident)) {
            const Token& name = take();
            std::string ns;
            std::string fn = name.text;
            if (at(Tok::Colon) && ahead(1).kind == Tok::Ident && ahead(2).kind == Tok::LParen) {
                take();
                ns = fn;
                fn = take().text;
            }
            if (at(Tok::LParen)) {
                take();
                std::vector<ExprPtr> args;
                if (!at(Tok::RParen)) {
                    for (;;) {
                        args.push_back(expr());
                        if (accept(Tok::Comma)) continue;
                        if (at(Tok::RParen)) break;
                        fail({"','", "')'"});
                    }
                }
                const Token& close = take();
                return Expr::call(ns, fn, std::move(args), join(name.span, close.span));
            }
            if (!ns.empty()) fail({"'('"});
            return Expr::variable(name.text, name.span);
        }
        fail({"expression"});
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
};

void check_arities(const Program& p) {
    std::map<std::string, std::pair<size_t, SourceSpan>> seen;
    auto check = [&](const Atom& a) {
        auto [it, inserted] = seen.emplace(a.predicate, std::make_pair(a.arity(), a.span));
        if (!inserted && it->second.first != a.arity())
            throw ArityError(a.predicate, it->second.first, a.arity(), a.span, it->second.second);
    };
    // Source order, so the first use reported is the earliest one.
    std::vector<const Atom*> atoms;
    for (const auto& f : p.facts) atoms.push_back(&f);
    for (const auto& r : p.rules) {
        atoms.push_back(&r.head);
        for (const auto& a : r.body) atoms.push_back(&a);
        for (const auto& a : r.negated) atoms.push_back(&a);
    }
    std::stable_sort(atoms.begin(), atoms.end(), [](const Atom* a, const Atom* b) {
        return std::tie(a->span.line, a->span.column) < std::tie(b->span.line, b->span.column);
    });
    for (const auto* a : atoms) check(*a);
}

}  // namespace

Program parse_program(std::string_view text) {
    Parser parser(Lexer(text).run());
    Program p = parser.program();
    check_arities(p);
    return p;
}

Atom parse_atom(std::string_view text) {
    Parser parser(Lexer(text).run());
    return parser.single_atom();
}

}  // namespace vada
