#include <algorithm>
#include <unordered_map>

#include "compiled.hpp"
#include "vada/engine.hpp"

namespace vada {

size_t FactCache::add_consumer() {
    cursors_.push_back(base_);
    return cursors_.size() - 1;
}

const CachedFact* FactCache::next(size_t consumer) {
    size_t& c = cursors_[consumer];
    if (c >= end()) return nullptr;
    return &facts_[c++ - base_];
}

size_t FactCache::evict() {
    size_t low = end();
    for (size_t c : cursors_) low = std::min(low, c);
    size_t n = low - base_;
    for (size_t i = 0; i < n; ++i) facts_.pop_front();
    base_ = low;
    return n;
}

std::optional<Value> AggregateState::update(const Tuple& group, const Tuple& contribution, const Value& value) {
    auto [it, fresh] = groups_.try_emplace(group);
    Group& g = it->second;
    if (!g.seen.insert(contribution).second) return std::nullopt;
    if ((op_ == AggregateOp::MSum || op_ == AggregateOp::MProd) && !value.is_numeric())
        throw EvalError(std::string(to_string(op_)) + " expects numbers, got " + value.to_literal());
    if (fresh) {
        g.value = op_ == AggregateOp::MCount ? Value::integer(1) : value;
        return g.value;
    }
    Value next;
    switch (op_) {
        case AggregateOp::MSum: next = arith::add(g.value, value); break;
        case AggregateOp::MProd: next = arith::mul(g.value, value); break;
        case AggregateOp::MCount: next = Value::integer(g.value.as_int() + 1); break;
        case AggregateOp::Min: next = arith::compare(value, g.value) < 0 ? value : g.value; break;
        case AggregateOp::Max: next = arith::compare(value, g.value) > 0 ? value : g.value; break;
    }
    if (next == g.value) return std::nullopt;
    g.value = next;
    return next;
}

std::optional<Value> AggregateState::current(const Tuple& group) const {
    auto it = groups_.find(group);
    if (it == groups_.end()) return std::nullopt;
    return it->second.value;
}

size_t AggregateState::contributions(const Tuple& group) const {
    auto it = groups_.find(group);
    return it == groups_.end() ? 0 : it->second.seen.size();
}

Tuple canonical_pattern(const Tuple& args) {
    Tuple out;
    out.reserve(args.size());
    std::unordered_map<uint64_t, uint64_t> rename;
    for (const auto& v : args) {
        if (!v.is_null()) {
            out.push_back(v);
            continue;
        }
        auto [it, fresh] = rename.emplace(v.null_id(), rename.size() + 1);
        out.push_back(Value::null(it->second));
    }
    return out;
}

Verdict terminate_check(const Tuple& candidate, const std::unordered_set<Tuple, TupleHash>& history, uint32_t depth,
                        uint32_t depth_bound) {
    if (!contains_null(candidate)) return Verdict::Admit;
    if (depth > depth_bound) return Verdict::Suppress;
    return history.count(canonical_pattern(candidate)) ? Verdict::Suppress : Verdict::Admit;
}

void ChaseState::add(const Fact& f) {
    facts[f.predicate].insert(f.args);
    if (contains_null(f.args)) history[f.predicate].insert(canonical_pattern(f.args));
}

bool ChaseState::contains(const Fact& f) const {
    auto it = facts.find(f.predicate);
    return it != facts.end() && it->second.count(f.args);
}

ApplyOutcome apply_rule(const Rule& rule, const Substitution& substitution, ChaseState& state, const EvalContext& ctx) {
    if (rule.aggregate()) throw EvalError("apply_rule does not handle aggregate rules", rule.span);
    std::map<std::string, size_t> no_preds;
    detail::CompiledRule r = detail::compile_rule(rule, 0, no_preds);
    detail::Binding b(r.var_names.size());
    for (const auto& [name, value] : substitution) {
        auto it = r.var_index.find(name);
        if (it != r.var_index.end()) b.set(it->second, value);
    }
    ApplyOutcome out;
    if (!detail::run_steps(r, r.pre, b, ctx)) return out;
    for (const auto& n : r.negated)
        if (state.contains(Fact{n.predicate, detail::instantiate(n, b)})) return out;

    uint32_t depth = 0;
    for (size_t v = 0; v < r.var_names.size(); ++v)
        if (b.bound[v] && b.values[v].is_null()) {
            auto it = state.null_depth.find(b.values[v].null_id());
            depth = std::max(depth, it == state.null_depth.end() ? 0u : it->second);
        }

    if (!r.existential_slots.empty()) {
        auto it = state.facts.find(rule.head.predicate);
        if (it != state.facts.end())
            for (const auto& t : it->second) {
                detail::Binding probe = b;
                if (detail::unify(r.head, t, probe)) {
                    out.status = ApplyOutcome::Status::Satisfied;
                    return out;
                }
            }
    }
    uint64_t mark = state.next_null;
    uint32_t minted_depth = 0;
    for (size_t s : r.existential_slots) {
        b.set(s, Value::null(state.next_null++));
        minted_depth = depth + 1;
    }
    Fact f{rule.head.predicate, detail::instantiate(r.head, b)};
    out.fact = f;
    if (state.contains(f)) {
        state.next_null = mark;
        out.status = ApplyOutcome::Status::Duplicate;
        return out;
    }
    uint32_t check_depth = r.existential_slots.empty() ? depth : minted_depth;
    if (terminate_check(f.args, state.history[f.predicate], check_depth, state.depth_bound) == Verdict::Suppress) {
        state.next_null = mark;
        out.status = ApplyOutcome::Status::Suppressed;
        return out;
    }
    for (uint64_t id = mark; id < state.next_null; ++id) state.null_depth[id] = minted_depth;
    state.add(f);
    out.status = ApplyOutcome::Status::Admitted;
    return out;
}

}  // namespace vada
