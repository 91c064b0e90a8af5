#include <gtest/gtest.h>

#include "corpus.hpp"
#include "vada/error.hpp"
#include "vada/expr.hpp"
#include "vada/fact.hpp"
#include "vada/parser.hpp"

using namespace vada;

namespace {

struct NoVars : Scope {
    const Value* lookup(std::string_view) const override { return nullptr; }
};

Value eval(const std::string& expr_text) {
    // parse through a rule so the expression grammar is the rule grammar
    Program p = parse_program("h(V) :- d(X), V = " + expr_text + ".\nd(1).");
    return evaluate(*p.rules[0].assignments[0].expr, NoVars{}, EvalContext{});
}

}  // namespace

TEST(Parser, ChasePairHasExistentialZ) {
    Program p = parse_program("r(X,Z) :- p(X).\np(Y) :- r(X,Y).");
    ASSERT_EQ(p.rules.size(), 2u);
    EXPECT_EQ(p.rules[0].existential_vars, std::vector<std::string>{"Z"});
    EXPECT_TRUE(p.rules[1].existential_vars.empty());
    EXPECT_EQ(p.rules[0].head.predicate, "r");
    EXPECT_EQ(p.rules[0].body.size(), 1u);
}

TEST(Parser, OutputAndPostAnnotations) {
    Program p = parse_program("@output(\"cluster\"). @post(\"cluster\", \"min(2)\").");
    ASSERT_EQ(p.annotations.size(), 2u);
    EXPECT_EQ(p.annotations[0].kind, Annotation::Kind::Output);
    EXPECT_EQ(p.annotations[0].target(), "cluster");
    EXPECT_EQ(p.annotations[1].kind, Annotation::Kind::Post);
    EXPECT_EQ(p.annotations[1].args[1].as_string(), "min(2)");
}

TEST(Parser, SoftRuleWithAggregate) {
    Program p = parse_program("0.8 :: own(X,Z,W) :- own(X,Y,S), own(Y,Z,T), W = msum(S*T).");
    ASSERT_EQ(p.rules.size(), 1u);
    const Rule& r = p.rules[0];
    ASSERT_TRUE(r.weight.has_value());
    EXPECT_DOUBLE_EQ(*r.weight, 0.8);
    ASSERT_NE(r.aggregate(), nullptr);
    EXPECT_EQ(r.aggregate()->aggregate->op, AggregateOp::MSum);
    EXPECT_EQ(r.aggregate()->variable, "W");
    EXPECT_TRUE(r.existential_vars.empty());
}

TEST(Parser, UnclosedAtomIsParseError) {
    try {
        parse_program("p(X :-");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.span().line, 1u);
        EXPECT_GE(e.span().column, 4u);
        EXPECT_FALSE(e.expected().empty());
    }
}

TEST(Parser, ArityMismatchIsDistinctError) {
    EXPECT_THROW(parse_program("p(1). p(1, 2)."), ArityError);
}

TEST(Parser, UnknownAnnotationRejected) { EXPECT_THROW(parse_program("@frobnicate(\"x\")."), ParseError); }

TEST(Parser, NonGroundFactRejected) { EXPECT_THROW(parse_program("p(X)."), ParseError); }

TEST(Parser, NegationConditionsAndComments) {
    Program p = parse_program(
        "% comment line\n"
        "b(A) :- not c(A), c(B), n(A, B), A != B. % trailing\n"
        "c(1). n(1, 2).");
    ASSERT_EQ(p.rules.size(), 1u);
    EXPECT_EQ(p.rules[0].negated.size(), 1u);
    EXPECT_EQ(p.rules[0].body.size(), 2u);
    EXPECT_EQ(p.rules[0].conditions.size(), 1u);
    EXPECT_EQ(p.facts.size(), 2u);
}

TEST(Parser, LiteralKinds) {
    Program p = parse_program("f(\"s\", 3, 2.5, #T, #F, [1, 2]).");
    const auto& args = p.facts[0].args;
    EXPECT_EQ(args[0].value.type(), Value::Type::String);
    EXPECT_EQ(args[1].value.type(), Value::Type::Integer);
    EXPECT_EQ(args[2].value.type(), Value::Type::Double);
    EXPECT_EQ(args[3].value, Value::boolean(true));
    EXPECT_EQ(args[4].value, Value::boolean(false));
    EXPECT_EQ(args[5].value.type(), Value::Type::Set);
}

TEST(Parser, SpansPointIntoSource) {
    Program p = parse_program("a(1).\n\nb(X) :- a(X).");
    EXPECT_EQ(p.rules[0].span.line, 3u);
    EXPECT_EQ(p.rules[0].span.column, 1u);
}

TEST(Parser, ParseAtomAcceptsTrailingDot) {
    Atom a = parse_atom("controls(\"A\",\"C\").");
    EXPECT_EQ(a.predicate, "controls");
    EXPECT_EQ(fact_from_atom(a).to_string(), "controls(\"A\", \"C\")");
}

TEST(Format, ChasePairRoundTrips) {
    Program p = parse_program("r(X,Z) :- p(X).\np(Y) :- r(X,Y).");
    EXPECT_EQ(parse_program(format_program(p)), p);
}

TEST(Format, SoftWeightPrinted) {
    Program p = parse_program("0.8 :: own(X,Z,W) :- own(X,Y,S), own(Y,Z,T), W = msum(S*T).");
    std::string text = format_program(p);
    EXPECT_NE(text.find("0.8 ::"), std::string::npos);
    EXPECT_EQ(parse_program(text), p);
}

TEST(Format, PostAnnotationVerbatim) {
    Program p = parse_program("@output(\"cluster\"). @post(\"cluster\", \"min(2)\").");
    EXPECT_NE(format_program(p).find("@post(\"cluster\", \"min(2)\")."), std::string::npos);
}

TEST(Format, CorpusRoundTrips) {
    for (const char* name : {"chase.vada", "owl2ql.vada", "example1.vada", "company_control.vada", "dbscan.vada",
                             "feature.vada", "pipeline.vada", "oddeven.vada", "not_warded.vada"}) {
        SCOPED_TRACE(name);
        Program p = testing_support::load_corpus(name);
        Program again = parse_program(format_program(p));
        EXPECT_EQ(again, p);
        EXPECT_EQ(format_program(again), format_program(p));
    }
}

TEST(Expr, IntegerDivisionYieldsDouble) {
    Value v = eval("7 / 2");
    EXPECT_EQ(v.type(), Value::Type::Double);
    EXPECT_DOUBLE_EQ(v.as_double(), 3.5);
}

TEST(Expr, ArithmeticTypes) {
    EXPECT_EQ(eval("2 + 3"), Value::integer(5));
    EXPECT_EQ(eval("2 * 1.5"), Value::real(3.0));
    EXPECT_EQ(eval("2 ^ 3"), Value::real(8.0));
    EXPECT_EQ(eval("-(4 - 6)"), Value::integer(2));
}

TEST(Expr, DistanceFormula) {
    Value v = eval("sqrt((0.697 - 0.774)^2 + (0.460 - 0.376)^2)");
    EXPECT_NEAR(v.as_double(), std::sqrt(0.077 * 0.077 + 0.084 * 0.084), 1e-15);
}

TEST(Expr, DivisionByZeroIsEvalError) { EXPECT_THROW(eval("1 / 0"), EvalError); }

TEST(Expr, SqrtOfStringIsEvalError) { EXPECT_THROW(eval("sqrt(\"x\")"), EvalError); }

TEST(Expr, StringAndDateFunctions) {
    EXPECT_EQ(eval("concat(\"ab\", \"cd\")"), Value::string("abcd"));
    EXPECT_EQ(eval("length(\"abc\")"), Value::integer(3));
    EXPECT_EQ(eval("year(date(\"2020-03-04\"))"), Value::integer(2020));
    EXPECT_EQ(eval("date_diff(date(\"2020-03-04\"), date(\"2020-03-01\"))"), Value::integer(3));
}

TEST(Expr, NamespacedCall) { EXPECT_EQ(eval("math:abs(-3)"), Value::integer(3)); }

TEST(Value, SetEqualityIgnoresOrder) {
    EXPECT_EQ(Value::set({Value::integer(2), Value::integer(1)}), Value::set({Value::integer(1), Value::integer(2)}));
    EXPECT_EQ(Value::set({Value::integer(1), Value::integer(1)}).as_set().size(), 1u);
}

TEST(Value, IntegerAndDoubleDistinct) { EXPECT_NE(Value::integer(1), Value::real(1.0)); }

TEST(Value, Literals) {
    EXPECT_EQ(Value::real(0.5).to_literal(), "0.5");
    EXPECT_EQ(Value::real(14).to_literal(), "14.0");
    EXPECT_EQ(Value::string("a\"b").to_literal(), "\"a\\\"b\"");
    EXPECT_EQ(Value::null(3).to_literal(), "_:n3");
    EXPECT_EQ(Value::boolean(true).to_literal(), "#T");
}

TEST(Parser, AnonymousVariablesAreDistinct) {
    Program p = parse_program("e(1,2).\nf(X) :- e(X,_), e(_,X).");
    const auto& body = p.rules[0].body;
    EXPECT_NE(body[0].args[1].name, body[1].args[0].name);
    EXPECT_EQ(parse_atom("r(_, _)").args[0].name, "_");
}
