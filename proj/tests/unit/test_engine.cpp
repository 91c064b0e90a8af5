#include <gtest/gtest.h>

#include <chrono>

#include "dbscan_oracle.hpp"
#include "naive.hpp"
#include "runner.hpp"
#include "vada/engine.hpp"
#include "vada/error.hpp"
#include "vada/parser.hpp"

using namespace vada;
using namespace testing_support;

namespace {

RunResult run_text(const std::string& text, EngineOptions opt = {}) { return run(plan(parse_program(text)), {}, opt); }

std::vector<std::string> trace_lines(const RunResult& r) {
    std::vector<std::string> out;
    for (const auto& e : r.trace) out.push_back((e.admitted ? "+ " : "- ") + e.fact.to_string());
    return out;
}

}  // namespace

// ---- chase -------------------------------------------------------------------

TEST(Chase, TwoRuleProgramAdmitsFourFactsThenSuppresses) {
    EngineOptions opt;
    opt.trace = true;
    auto start = std::chrono::steady_clock::now();
    RunResult r = run(plan(load_corpus("chase.vada")), {}, opt);
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(1));
    EXPECT_EQ(trace_lines(r), (std::vector<std::string>{"+ p(\"a\")", "+ r(\"a\", _:n1)", "+ p(_:n1)",
                                                        "+ r(_:n1, _:n2)", "- p(_:n2)"}));
    EXPECT_EQ(r.stats.suppressed, 1u);
    EXPECT_EQ(r.stats.nulls, 2u);
    EXPECT_EQ(certain_answers(r.facts("p")), std::vector<Tuple>{tup({S("a")})});
}

TEST(Chase, PlanHasFeedbackBetweenPAndR) {
    Plan p = plan(load_corpus("chase.vada"));
    auto fb = p.feedback_edges();
    ASSERT_FALSE(fb.empty());
    std::set<std::string> labels;
    for (const auto& e : fb) labels.insert(p.nodes()[e.from].label);
    EXPECT_TRUE(labels.count("p"));
    EXPECT_TRUE(labels.count("r"));
}

TEST(Chase, OwlRestrictedChase) {
    RunResult r = run(plan(load_corpus("owl2ql.vada")));
    const auto& triples = r.facts("triple");
    ASSERT_EQ(triples.size(), 2u);
    Tuple has_parent, parent_of;
    for (const auto& t : triples) (t[1] == S("hasParent") ? has_parent : parent_of) = t;
    ASSERT_FALSE(has_parent.empty());
    ASSERT_FALSE(parent_of.empty());
    Value nu = has_parent[2];
    EXPECT_TRUE(nu.is_null());
    EXPECT_EQ(has_parent[0], S("alice"));
    EXPECT_EQ(parent_of, tup({nu, S("parentOf"), S("alice")}));
    EXPECT_TRUE(r.contains(Fact{"type", tup({S("alice"), S("Agent")})}));
    EXPECT_TRUE(r.contains(Fact{"type", tup({nu, S("Parent")})}));
    // type(nu,Parent) with restriction(Parent,parentOf) is already witnessed by triple(nu,parentOf,alice)
    EXPECT_EQ(r.stats.satisfied, 1u);
}

TEST(Chase, CertainAnswersStableUnderDepthBound) {
    for (const char* name : {"chase.vada", "owl2ql.vada", "example1_hard.vada"}) {
        SCOPED_TRACE(name);
        EngineOptions a, b;
        a.null_depth = 32;
        b.null_depth = 64;
        RunResult ra = run(plan(load_corpus(name)), {}, a), rb = run(plan(load_corpus(name)), {}, b);
        for (const auto& [pred, tuples] : ra.relations)
            EXPECT_EQ(certain_answers(tuples), certain_answers(rb.facts(pred))) << pred;
    }
}

TEST(Chase, DepthBoundSuppressesDeepNulls) {
    // every new null sits under a fresh constant-free pattern only through depth
    EngineOptions opt;
    opt.null_depth = 3;
    RunResult r = run_text("n(0).\ns(X,Y) :- n(X).\nn(Y) :- s(X,Y).\nt(X) :- s(X,Y).", opt);
    EXPECT_LE(r.stats.nulls, 3u);
}

TEST(Chase, FactLimitRaisesResourceError) {
    EngineOptions opt;
    opt.max_facts = 10;
    EXPECT_THROW(run_text("e(0).\ne(Y) :- e(X), Y = X + 1, X < 100.", opt), ResourceError);
}

TEST(Chase, CacheLimitRaisesResourceError) {
    EngineOptions opt;
    opt.cache_limit = 1;
    EXPECT_THROW(run_text("e(1). e(2). e(3).\nf(X) :- e(X), e(Y).", opt), ResourceError);
}

// ---- apply_rule / terminate_check ----------------------------------------------

TEST(ApplyRule, ExistentialHeadMintsFreshNull) {
    Rule r = parse_program("r(X,Z) :- p(X).").rules[0];
    ChaseState st;
    st.add(Fact{"p", tup({S("a")})});
    auto out = apply_rule(r, {{"X", S("a")}}, st);
    ASSERT_EQ(out.status, ApplyOutcome::Status::Admitted);
    ASSERT_TRUE(out.fact);
    EXPECT_EQ(out.fact->args[0], S("a"));
    EXPECT_TRUE(out.fact->args[1].is_null());
    auto again = apply_rule(r, {{"X", S("a")}}, st);
    EXPECT_EQ(again.status, ApplyOutcome::Status::Satisfied);
}

TEST(ApplyRule, ConditionHoldsOrFails) {
    Rule r = parse_program("linked(X,Y) :- own(X,Y,S), S > 0.2.").rules[0];
    ChaseState st;
    auto ok = apply_rule(r, {{"X", S("a")}, {"Y", S("b")}, {"S", D(0.4)}}, st);
    ASSERT_EQ(ok.status, ApplyOutcome::Status::Admitted);
    EXPECT_EQ(ok.fact->to_string(), "linked(\"a\", \"b\")");
    auto no = apply_rule(r, {{"X", S("a")}, {"Y", S("e")}, {"S", D(0.1)}}, st);
    EXPECT_EQ(no.status, ApplyOutcome::Status::ConditionFailed);
    EXPECT_FALSE(no.fact);
}

TEST(ApplyRule, IllTypedExpressionIsEvalError) {
    Rule r = parse_program("d(A,C) :- p(A,X), C = sqrt(X).").rules[0];
    ChaseState st;
    EXPECT_THROW(apply_rule(r, {{"A", I(1)}, {"X", S("x")}}, st), EvalError);
}

TEST(TerminateCheck, IsomorphicNullFactSuppressed) {
    std::unordered_set<Tuple, TupleHash> history{canonical_pattern(tup({Value::null(1)}))};
    EXPECT_EQ(terminate_check(tup({Value::null(2)}), history, 1, 32), Verdict::Suppress);
}

TEST(TerminateCheck, ConstantDoesNotMatchPlaceholder) {
    std::unordered_set<Tuple, TupleHash> history;
    EXPECT_EQ(terminate_check(tup({Value::null(1)}), history, 1, 32), Verdict::Admit);
    history.insert(canonical_pattern(tup({S("a")})));
    EXPECT_EQ(terminate_check(tup({Value::null(1)}), history, 1, 32), Verdict::Admit);
}

TEST(TerminateCheck, GroundFactsAlwaysAdmitted) {
    std::unordered_set<Tuple, TupleHash> history{canonical_pattern(tup({S("a")}))};
    EXPECT_EQ(terminate_check(tup({S("a")}), history, 0, 32), Verdict::Admit);
}

TEST(TerminateCheck, PatternRenumbersByFirstOccurrence) {
    EXPECT_EQ(canonical_pattern(tup({Value::null(9), S("c"), Value::null(4), Value::null(9)})),
              canonical_pattern(tup({Value::null(2), S("c"), Value::null(7), Value::null(2)})));
    EXPECT_NE(canonical_pattern(tup({Value::null(1), Value::null(1)})),
              canonical_pattern(tup({Value::null(1), Value::null(2)})));
}

TEST(TerminateCheck, DepthCap) {
    std::unordered_set<Tuple, TupleHash> history;
    EXPECT_EQ(terminate_check(tup({Value::null(1)}), history, 33, 32), Verdict::Suppress);
}

// ---- aggregation ----------------------------------------------------------------

TEST(Aggregate, MsumEmitsPartialThenFinal) {
    AggregateState st(AggregateOp::MSum);
    Tuple g = tup({S("a"), S("c")});
    auto first = st.update(g, tup({S("b")}), D(0.4 * 0.5));
    auto second = st.update(g, tup({S("d")}), D(0.6 * 0.5));
    ASSERT_TRUE(first && second);
    EXPECT_DOUBLE_EQ(first->as_double(), 0.2);
    EXPECT_NEAR(second->as_double(), 0.5, 1e-12);
}

TEST(Aggregate, RepeatedContributionIsNoOp) {
    AggregateState st(AggregateOp::MSum);
    Tuple g = tup({S("a")});
    st.update(g, tup({I(1)}), D(0.3));
    EXPECT_FALSE(st.update(g, tup({I(1)}), D(0.3)));
    EXPECT_EQ(st.contributions(g), 1u);
    EXPECT_DOUBLE_EQ(st.current(g)->as_double(), 0.3);
}

TEST(Aggregate, McountCountsDistinctContributions) {
    AggregateState st(AggregateOp::MCount);
    Tuple g = tup({I(7)});
    for (int b = 0; b < 6; ++b) st.update(g, tup({I(b)}), I(b));
    st.update(g, tup({I(3)}), I(3));
    EXPECT_EQ(*st.current(g), I(6));
}

TEST(Aggregate, MinMaxMprod) {
    AggregateState mn(AggregateOp::Min), mx(AggregateOp::Max), pr(AggregateOp::MProd);
    Tuple g;
    for (int v : {5, 3, 8}) {
        mn.update(g, tup({I(v)}), I(v));
        mx.update(g, tup({I(v)}), I(v));
        pr.update(g, tup({I(v)}), I(v));
    }
    EXPECT_EQ(*mn.current(g), I(3));
    EXPECT_EQ(*mx.current(g), I(8));
    EXPECT_EQ(*pr.current(g), I(120));
}

TEST(Aggregate, NonNumericInputIsEvalError) {
    AggregateState st(AggregateOp::MSum);
    Tuple g;
    st.update(g, tup({I(1)}), I(1));
    EXPECT_THROW(st.update(g, tup({I(2)}), S("x")), EvalError);
}

TEST(Aggregate, ExampleOneDerivesHalfExactly) {
    EngineOptions opt;
    opt.trace = true;
    RunResult r = run(plan(load_corpus("example1_hard.vada")), {}, opt);
    Tuple ac;
    for (const auto& t : r.facts("own"))
        if (t[0] == S("a") && t[1] == S("c")) {
            EXPECT_TRUE(ac.empty()) << "one final value per group";
            ac = t;
        }
    ASSERT_FALSE(ac.empty());
    EXPECT_NEAR(ac[2].as_double(), 0.5, 1e-12);
    EXPECT_TRUE(r.contains(Fact{"linked", tup({S("a"), S("c")})}));
    // the emitted values of the group strictly increase
    std::vector<double> seq;
    for (const auto& e : r.trace)
        if (e.admitted && e.fact.predicate == "own" && e.fact.args[0] == S("a") && e.fact.args[1] == S("c"))
            seq.push_back(e.fact.args[2].as_double());
    ASSERT_EQ(seq.size(), 2u);
    EXPECT_LT(seq[0], seq[1]);
}

TEST(Aggregate, CompanyControlSingleRecursiveStratum) {
    Plan p = plan(load_corpus("company_control.vada"));
    EXPECT_EQ(p.strata().strata.size(), 1u);
    bool agg = false;
    for (const auto& n : p.nodes()) agg |= n.kind == PipelineNode::Kind::Aggregate;
    EXPECT_TRUE(agg);
    EXPECT_FALSE(p.feedback_edges().empty());
}

TEST(Aggregate, CompanyControlMatchesNaiveOracle) {
    auto run = run_corpus("company_control.vada");
    auto oracle_db = oracle::naive_fixpoint(run.program, run.inputs);
    const auto& got = run.result.facts("controls");
    EXPECT_EQ(std::set<Tuple>(got.begin(), got.end()), oracle_db["controls"]);
    EXPECT_EQ(got, (std::vector<Tuple>{tup({S("A"), S("B")}), tup({S("A"), S("C")})}));
}

// ---- stratification at run time --------------------------------------------------

TEST(Strata, DbscanPlanOrder) {
    Plan p = plan(load_corpus("dbscan.vada"));
    const auto& s = p.strata().stratum_of;
    EXPECT_GE(p.strata().strata.size(), 3u);
    EXPECT_LT(s.at("core_point"), s.at("border_point"));
    EXPECT_LT(s.at("border_point"), s.at("noise_point"));
}

TEST(Strata, NoLateNegatedFactsOnCorpus) {
    for (const char* name : {"dbscan.vada", "company_control.vada", "example1.vada"}) {
        SCOPED_TRACE(name);
        EXPECT_EQ(run_corpus(name).result.stats.late_negated_facts, 0u);
    }
}

TEST(Strata, NegationSeesCompletedLowerStratum) {
    RunResult r = run_text(
        "e(1,2). e(2,3). e(3,4).\n"
        "t(X,Y) :- e(X,Y).\nt(X,Z) :- t(X,Y), e(Y,Z).\n"
        "n(X) :- e(X,Y), not t(1,X).");
    EXPECT_EQ(r.facts("n"), std::vector<Tuple>{tup({I(1)})});
}

// ---- planning errors -----------------------------------------------------------

TEST(Plan, RejectsUnwarded) {
    try {
        plan(load_corpus("not_warded.vada"));
        FAIL();
    } catch (const PlanError& e) {
        EXPECT_NE(e.message().find("not warded"), std::string::npos);
        EXPECT_EQ(e.span().line, 4u);
    }
}

TEST(Plan, RejectsNegationCycle) { EXPECT_THROW(plan(load_corpus("oddeven.vada")), CycleError); }

TEST(Plan, RejectsErrorLints) { EXPECT_THROW(plan(load_corpus("company_control_share2.vada")), PlanError); }

TEST(Plan, RejectsUnsupportedTargets) {
    try {
        plan(parse_program("@input(\"x\").\n@bind(\"x\", \"postgres\", \"db\", \"t\").\ny(A) :- x(A).\n"));
        FAIL();
    } catch (const PlanError& e) {
        EXPECT_NE(e.message().find("unsupported target"), std::string::npos);
    }
    EXPECT_THROW(plan(parse_program("@qbind(\"x\", \"postgres\", \"db\", \"select 1\").\nx(1).\n")), PlanError);
}

TEST(Plan, LibraryAliases) {
    RunResult r = run_text("@library(\"m:\", \"math\").\ne(-2).\nf(Y) :- e(X), Y = m:abs(X).");
    EXPECT_EQ(r.facts("f"), std::vector<Tuple>{tup({I(2)})});
    EXPECT_THROW(plan(parse_program("@library(\"q:\", \"nosuch\").\ne(1).")), PlanError);
}

TEST(Plan, RootsAreOutputs) {
    Plan p = plan(load_corpus("company_control.vada"));
    EXPECT_EQ(p.roots(), std::set<std::string>{"controls"});
    EXPECT_FALSE(p.describe().empty());
}

// ---- caches and eviction --------------------------------------------------------

TEST(Cache, EvictsOnlyWhenAllConsumersPassed) {
    FactCache c;
    size_t a = c.add_consumer(), b = c.add_consumer();
    c.append({tup({I(1)}), 0});
    c.append({tup({I(2)}), 0});
    c.next(a);
    EXPECT_EQ(c.evict(), 0u);  // b is still behind
    c.next(b);
    EXPECT_EQ(c.evict(), 1u);
    EXPECT_EQ(c.resident(), 1u);
    EXPECT_EQ(c.begin(), 1u);
    c.next(a);
    c.next(b);
    EXPECT_EQ(c.evict(), 1u);
    EXPECT_EQ(c.resident(), 0u);
}

TEST(Cache, FeedbackConsumerMidIterationKeepsFacts) {
    FactCache c;
    size_t fwd = c.add_consumer(), feedback = c.add_consumer();
    for (int i = 0; i < 5; ++i) c.append({tup({I(i)}), 0});
    while (c.has_next(fwd)) c.next(fwd);
    c.next(feedback);
    EXPECT_EQ(c.evict(), 1u);
    EXPECT_EQ(c.resident(), 4u);
}

TEST(Cache, LinearPipelineWindowIsConstant) {
    auto eager = run_corpus("pipeline.vada");
    EngineOptions off;
    off.eviction = false;
    auto lazy = run_corpus("pipeline.vada", off);
    EXPECT_EQ(eager.result.facts("d"), lazy.result.facts("d"));
    EXPECT_EQ(eager.result.facts("d").size(), 10000u);
    EXPECT_LE(eager.result.stats.peak_cache, 8u);
    EXPECT_GT(lazy.result.stats.peak_cache, 10000u);
}

// ---- determinism and statistics -------------------------------------------------

TEST(Determinism, IdenticalRunsIdenticalResults) {
    for (const char* name : {"company_control.vada", "dbscan.vada", "owl2ql.vada"}) {
        SCOPED_TRACE(name);
        auto a = run_corpus(name), b = run_corpus(name);
        EXPECT_EQ(a.result.relations, b.result.relations);
        EXPECT_EQ(a.result.stats.to_map(), b.result.stats.to_map());
    }
}

TEST(Stats, StableKeys) {
    auto m = run_corpus("company_control.vada").result.stats.to_map();
    for (const char* k : {"facts.controls", "rule.1.firings", "suppressed", "peak_cache", "facts_admitted", "evicted",
                          "streamed", "nulls"})
        EXPECT_TRUE(m.count(k)) << k;
    EXPECT_EQ(m.at("facts.controls"), 2u);
}

TEST(Stats, DisabledRulesSkipped) {
    Program p = parse_program("e(1).\nf(X) :- e(X).\ng(X) :- e(X).");
    EngineOptions opt;
    opt.disabled_rules = {true, false};
    RunResult r = run(plan(p), {}, opt);
    EXPECT_TRUE(r.facts("f").empty());
    EXPECT_EQ(r.facts("g").size(), 1u);
}

TEST(Inputs, ArityMismatchIsSchemaError) {
    Program p = parse_program("@input(\"e\").\nf(X) :- e(X, Y).");
    Inputs in{{"e", {tup({I(1)})}}};
    EXPECT_THROW(run(plan(p), in), SchemaError);
}

// ---- DBSCAN relations against the naive oracle -----------------------------------

TEST(Dbscan, RelationsMatchNaiveFixpoint) {
    EngineOptions opt;
    opt.extra_roots = {"core_point", "border_point", "noise_point", "neighbourhood", "reachable"};
    auto run = run_corpus("dbscan.vada", opt);
    auto db = oracle::naive_fixpoint(run.program, run.inputs);
    for (const auto& pred : opt.extra_roots) {
        const auto& got = run.result.facts(pred);
        EXPECT_EQ(std::set<Tuple>(got.begin(), got.end()), db[pred]) << pred;
    }
}

TEST(Dbscan, ClustersMatchFlatImplementation) {
    auto run = run_corpus("dbscan.vada");
    auto outs = finalize_outputs(run.result, run.bindings);
    std::map<int64_t, int64_t> label;
    for (const auto& t : outs.at("cluster")) {
        EXPECT_FALSE(label.count(t[0].as_int())) << "point in two clusters after min(2)";
        label[t[0].as_int()] = t[1].as_int();
    }
    auto ref = oracle::dbscan(oracle::generate_points(2024), 0.11, 5);
    ASSERT_TRUE(ref.ambiguous.empty());
    EXPECT_EQ(oracle::partition(label), oracle::partition(ref.label));
    // a cluster's label is its smallest member
    for (auto [id, l] : label) EXPECT_EQ(l, ref.label.at(id));
    std::set<int64_t> noise;
    for (const auto& t : outs.at("noise_point")) noise.insert(t[0].as_int());
    EXPECT_EQ(noise, ref.noise);
}
