#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vada/analyzer.hpp"
#include "vada/ast.hpp"
#include "vada/explain.hpp"
#include "vada/expr.hpp"
#include "vada/fact.hpp"

namespace vada {

// ---------------------------------------------------------------------------
// Local caches

struct CachedFact {
    Tuple tuple;
    NodeId node = 0;
};

/// Facts produced by one pipeline node, read by registered consumers through
/// private cursors. Positions are absolute; evicted prefixes are gone.
class FactCache {
public:
    size_t add_consumer();
    size_t consumers() const { return cursors_.size(); }

    void append(CachedFact f) { facts_.push_back(std::move(f)); }
    /// Next unread fact for `consumer`, advancing its cursor.
    const CachedFact* next(size_t consumer);
    bool has_next(size_t consumer) const { return cursors_[consumer] < end(); }
    size_t cursor(size_t consumer) const { return cursors_[consumer]; }

    /// Drops facts every consumer has read; returns how many.
    size_t evict();

    size_t begin() const { return base_; }
    size_t end() const { return base_ + facts_.size(); }
    size_t resident() const { return facts_.size(); }

private:
    std::deque<CachedFact> facts_;
    size_t base_ = 0;
    std::vector<size_t> cursors_;
};

// ---------------------------------------------------------------------------
// Monotonic aggregation

class AggregateState {
public:
    explicit AggregateState(AggregateOp op) : op_(op) {}

    /// Absorbs one contribution. Returns the new group value when it changed;
    /// nothing for a repeated contribution key or an unchanged value.
    std::optional<Value> update(const Tuple& group, const Tuple& contribution, const Value& value);
    std::optional<Value> current(const Tuple& group) const;
    size_t contributions(const Tuple& group) const;

private:
    struct Group {
        Value value;
        std::unordered_set<Tuple, TupleHash> seen;
    };
    AggregateOp op_;
    std::unordered_map<Tuple, Group, TupleHash> groups_;
};

// ---------------------------------------------------------------------------
// Termination control

/// Nulls renumbered 1, 2, ... by first occurrence; constants unchanged.
Tuple canonical_pattern(const Tuple& args);

enum class Verdict { Admit, Suppress };

/// `history` holds canonical patterns of admitted null-bearing facts of the
/// candidate's predicate.
Verdict terminate_check(const Tuple& candidate, const std::unordered_set<Tuple, TupleHash>& history,
                        uint32_t depth, uint32_t depth_bound);

/// A plain fact set with termination history; the single-rule chase step.
struct ChaseState {
    std::map<std::string, std::unordered_set<Tuple, TupleHash>> facts;
    std::map<std::string, std::unordered_set<Tuple, TupleHash>> history;
    std::unordered_map<uint64_t, uint32_t> null_depth;
    uint64_t next_null = 1;
    uint32_t depth_bound = 32;

    void add(const Fact& f);
    bool contains(const Fact& f) const;
};

struct ApplyOutcome {
    enum class Status { Admitted, Duplicate, Satisfied, Suppressed, ConditionFailed };
    Status status = Status::ConditionFailed;
    std::optional<Fact> fact;
};

/// Applies a non-aggregate rule under a substitution of its body variables:
/// evaluates assignments and conditions, checks negations against the state,
/// mints nulls for existential variables (restricted chase) and runs the
/// termination check. Admitted facts are added to the state.
ApplyOutcome apply_rule(const Rule& rule, const Substitution& substitution, ChaseState& state,
                        const EvalContext& ctx = {});

// ---------------------------------------------------------------------------
// Planning

namespace detail {
struct CompiledProgram;
}

struct EngineOptions;
struct RunResult;
using Inputs = std::map<std::string, std::vector<Tuple>>;

struct PipelineNode {
    enum class Kind { Scan, Join, Filter, Project, Aggregate, NegationCheck, ExistentialProject, Union };
    Kind kind = Kind::Scan;
    std::string label;  // predicate name for Scan/Union, rule number otherwise
    size_t stratum = 0;
    std::vector<size_t> children;
};

std::string_view to_string(PipelineNode::Kind kind);

struct PipelineEdge {
    size_t from = 0;  // child
    size_t to = 0;    // parent
    bool feedback = false;
};

class Plan {
public:
    const Program& program() const { return program_; }
    const Stratification& strata() const { return strata_; }
    const WardednessReport& wardedness() const { return wardedness_; }
    const std::vector<PipelineNode>& nodes() const { return nodes_; }
    const std::vector<PipelineEdge>& edges() const { return edges_; }
    const EvalContext& context() const { return ctx_; }
    /// Pipeline roots: output predicates, or every predicate without @output.
    const std::set<std::string>& roots() const { return roots_; }
    /// Predicates whose facts stay in a relation store for joins, negation,
    /// restricted-chase checks or output.
    const std::set<std::string>& retained() const { return retained_; }
    std::vector<PipelineEdge> feedback_edges() const;
    std::string describe() const;

private:
    friend Plan plan(const Program& program);
    Program program_;
    Stratification strata_;
    WardednessReport wardedness_;
    std::vector<PipelineNode> nodes_;
    std::vector<PipelineEdge> edges_;
    EvalContext ctx_;
    std::set<std::string> roots_;
    std::set<std::string> retained_;
    std::shared_ptr<const detail::CompiledProgram> compiled_;

    friend RunResult run(const Plan&, const Inputs&, const EngineOptions&);
};

/// Rejects unwarded programs, negation cycles, error lints, unknown
/// libraries and unsupported binding targets.
Plan plan(const Program& program);

// ---------------------------------------------------------------------------
// Running

struct EngineOptions {
    uint32_t null_depth = 32;
    size_t max_facts = 5'000'000;
    /// Maximum facts resident across all caches; 0 for no limit.
    size_t cache_limit = 0;
    bool eviction = true;
    bool provenance = false;
    bool keep_all_derivations = false;
    bool trace = false;
    /// Extra predicates to evaluate even when they are not outputs.
    std::set<std::string> extra_roots;
    /// Rules switched off for this run (soft-rule worlds); indexed like Program::rules.
    std::vector<bool> disabled_rules;
};

struct TraceEvent {
    Fact fact;
    bool admitted = true;
};

struct RunStats {
    std::map<std::string, size_t> facts_per_predicate;
    std::vector<size_t> rule_firings;
    size_t facts_admitted = 0;
    size_t duplicates = 0;
    size_t suppressed = 0;
    size_t depth_suppressed = 0;
    size_t satisfied = 0;
    size_t nulls = 0;
    size_t streamed = 0;
    size_t evicted = 0;
    size_t peak_cache = 0;
    /// Facts that reached a negated predicate after its stratum was closed.
    size_t late_negated_facts = 0;

    /// Flat view with stable keys, e.g. "facts.controls", "rule.3.firings".
    std::map<std::string, size_t> to_map() const;
};

struct RunResult {
    /// Final view per retained predicate, sorted; superseded aggregate
    /// emissions are dropped.
    std::map<std::string, std::vector<Tuple>> relations;
    std::set<std::string> outputs;
    RunStats stats;
    std::vector<TraceEvent> trace;
    std::shared_ptr<DerivationStore> provenance;

    const std::vector<Tuple>& facts(const std::string& predicate) const;
    bool contains(const Fact& fact) const;
};

RunResult run(const Plan& plan, const Inputs& inputs = {}, const EngineOptions& options = {});

/// Null-free tuples only.
std::vector<Tuple> certain_answers(const std::vector<Tuple>& tuples);

}  // namespace vada
