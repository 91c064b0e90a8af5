#include <gtest/gtest.h>

#include "json.hpp"
#include "replay.hpp"
#include "runner.hpp"
#include "vada/error.hpp"
#include "vada/explain.hpp"
#include "vada/parser.hpp"

using namespace vada;
using namespace testing_support;

namespace {

EngineOptions with_provenance(bool keep_all = false) {
    EngineOptions o;
    o.provenance = true;
    o.keep_all_derivations = keep_all;
    return o;
}

size_t depth(const Explanation& e) {
    size_t d = 0;
    for (const auto& c : e.children) d = std::max(d, depth(c));
    return d + 1;
}

}  // namespace

TEST(Explain, EveryCorpusRunReplays) {
    for (const char* name : {"company_control.vada", "dbscan.vada", "example1.vada", "example1_hard.vada", "chase.vada",
                             "owl2ql.vada", "feature.vada"}) {
        for (bool keep_all : {false, true}) {
            SCOPED_TRACE(std::string(name) + (keep_all ? " all" : " first"));
            EngineOptions opt = with_provenance(keep_all);
            auto r = run_corpus(name, opt);
            ASSERT_TRUE(r.result.provenance);
            auto rep = oracle::replay(*r.result.provenance, r.program, &r.result);
            EXPECT_TRUE(rep.ok()) << (rep.errors.empty() ? "" : rep.errors.front());
            EXPECT_GT(rep.nodes, 0u);
            EXPECT_TRUE(oracle::missing_derivations(*r.result.provenance, r.result).empty());
        }
    }
}

TEST(Explain, AggregateNodesCarryContributions) {
    auto r = run_corpus("company_control.vada", with_provenance());
    auto rep = oracle::replay(*r.result.provenance, r.program, &r.result);
    EXPECT_TRUE(rep.ok());
    EXPECT_GT(rep.aggregate_nodes, 0u);
}

TEST(Explain, CompanyControlTree) {
    auto r = run_corpus("company_control.vada", with_provenance());
    Explanation e = explain(*r.result.provenance, r.program, Fact{"controls", tup({S("A"), S("C")})});
    EXPECT_FALSE(e.edb);
    EXPECT_EQ(e.rule, 5u);  // 0-based; rendered as rule_6
    ASSERT_EQ(e.children.size(), 1u);
    const Explanation& agg = e.children[0];
    EXPECT_EQ(agg.fact.to_string(), "controlled(\"A\", \"C\")");
    // two contributions of two atoms each: through B (0.4) and directly (0.2)
    ASSERT_EQ(agg.children.size(), 4u);
    EXPECT_EQ(agg.children[1].fact.to_string(), "ownsDirectly(\"B\", \"C\", 0.4)");
    EXPECT_EQ(agg.children[3].fact.to_string(), "ownsDirectly(\"A\", \"C\", 0.2)");
    std::string text = render(e);
    EXPECT_EQ(text.rfind("controls(\"A\", \"C\") <- rule_6 {\n", 0), 0u);
    EXPECT_NE(text.find("      ownsDirectlyCSV(\"A\", \"C\", 0.2, \"IT\")\n"), std::string::npos);
    EXPECT_EQ(text.back(), '\n');
}

TEST(Explain, InputFactIsSingleLeaf) {
    auto r = run_corpus("example1_hard.vada", with_provenance());
    Explanation e = explain(*r.result.provenance, r.program, Fact{"linked", tup({S("a"), S("b")})});
    EXPECT_TRUE(e.edb);
    EXPECT_TRUE(e.children.empty());
    EXPECT_EQ(render(e), "linked(\"a\", \"b\")\n");
}

TEST(Explain, UnderivedFactThrows) {
    auto r = run_corpus("company_control.vada", with_provenance());
    EXPECT_THROW(explain(*r.result.provenance, r.program, Fact{"controls", tup({S("C"), S("A")})}), NotDerived);
}

TEST(Explain, FirstDerivationKeepsOnePerFact) {
    auto first = run_corpus("owl2ql.vada", with_provenance(false));
    auto all = run_corpus("owl2ql.vada", with_provenance(true));
    Fact alice_person{"type", tup({S("alice"), S("Person")})};
    EXPECT_EQ(first.result.provenance->derivations(alice_person).size(), 1u);
    // alice is a Person as input and again through her hasParent witness
    EXPECT_GE(all.result.provenance->derivations(alice_person).size(), 2u);
}

TEST(Explain, JsonMirrorsTree) {
    auto r = run_corpus("company_control.vada", with_provenance());
    Explanation e = explain(*r.result.provenance, r.program, Fact{"controls", tup({S("A"), S("B")})});
    auto j = nlohmann::json::parse(to_json(e));
    EXPECT_EQ(j["fact"], "controls(\"A\", \"B\")");
    EXPECT_EQ(j["rule"], 6);
    EXPECT_EQ(j["kind"], "rule");
    ASSERT_TRUE(j["body"].is_array());
    EXPECT_EQ(j["body"][0]["fact"], "controlled(\"A\", \"B\")");
    EXPECT_EQ(j["body"][0]["body"].size(), 2u);
    EXPECT_EQ(j["body"][0]["body"][1]["kind"], "input");
}

TEST(Explain, DeepChainIsFinite) {
    std::string text = "e(0).\n";
    text += "e(Y) :- e(X), Y = X + 1, X < 200.\n";
    Program p = parse_program(text);
    EngineOptions opt = with_provenance();
    RunResult r = run(plan(p), {}, opt);
    Explanation e = explain(*r.provenance, p, Fact{"e", tup({I(200)})});
    EXPECT_EQ(depth(e), 201u);
    EXPECT_TRUE(oracle::replay(*r.provenance, p, &r).ok());
}

TEST(Explain, NegationRecordedAgainstFinalInstance) {
    auto r = run_corpus("dbscan.vada", with_provenance());
    const auto& noise = r.result.facts("noise_point");
    ASSERT_FALSE(noise.empty());
    Explanation e = explain(*r.result.provenance, r.program, Fact{"noise_point", noise.front()});
    EXPECT_FALSE(e.edb);
    EXPECT_NE(e.rule_text.find("not"), std::string::npos);
}
