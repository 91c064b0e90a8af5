#pragma once

// Naive bottom-up fixpoint: every round re-evaluates every rule of a stratum
// against the whole instance by nested loops. No indexes, no streaming.
// Existential rules are rejected.

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vada/ast.hpp"
#include "vada/expr.hpp"
#include "vada/fact.hpp"

namespace oracle {

using vada::Atom;
using vada::Program;
using vada::Rule;
using vada::Tuple;
using vada::Value;

using Instance = std::map<std::string, std::set<Tuple>>;

namespace naive_detail {

using Env = std::map<std::string, Value>;

class EnvScope : public vada::Scope {
public:
    explicit EnvScope(const Env& env) : env_(env) {}
    const Value* lookup(std::string_view name) const override {
        auto it = env_.find(std::string(name));
        return it == env_.end() ? nullptr : &it->second;
    }

private:
    const Env& env_;
};

inline bool match(const Atom& a, const Tuple& t, Env& env) {
    if (a.args.size() != t.size()) return false;
    for (size_t i = 0; i < t.size(); ++i) {
        const auto& term = a.args[i];
        if (!term.is_variable()) {
            if (!(term.value == t[i])) return false;
            continue;
        }
        auto it = env.find(term.name);
        if (it == env.end()) env.emplace(term.name, t[i]);
        else if (!(it->second == t[i])) return false;
    }
    return true;
}

inline Tuple ground(const Atom& a, const Env& env) {
    Tuple t;
    for (const auto& term : a.args) t.push_back(term.is_variable() ? env.at(term.name) : term.value);
    return t;
}

inline void bodies(const Rule& r, size_t i, const Instance& db, Env& env, std::vector<Env>& out) {
    if (i == r.body.size()) {
        out.push_back(env);
        return;
    }
    auto it = db.find(r.body[i].predicate);
    if (it == db.end()) return;
    for (const auto& t : it->second) {
        Env e = env;
        if (match(r.body[i], t, e)) bodies(r, i + 1, db, e, out);
    }
}

inline bool mentions(const vada::Expr& e, const std::string& var) { return e.variables().count(var) > 0; }

/// Binds assignments in dependency order; false when some condition fails.
inline bool finish(const Rule& r, Env& env, const vada::EvalContext& ctx, const std::string& skip_var) {
    std::vector<bool> done(r.assignments.size(), false);
    for (bool changed = true; changed;) {
        changed = false;
        for (size_t k = 0; k < r.assignments.size(); ++k) {
            const auto& a = r.assignments[k];
            if (done[k] || a.is_aggregate()) continue;
            bool ready = true;
            for (const auto& v : a.expr->variables())
                if (!env.count(v)) ready = false;
            if (!ready) continue;
            Value v = vada::evaluate(*a.expr, EnvScope(env), ctx);
            auto it = env.find(a.variable);
            if (it != env.end()) {
                if (!vada::arith::loosely_equal(it->second, v)) return false;
            } else {
                env.emplace(a.variable, v);
            }
            done[k] = changed = true;
        }
    }
    for (const auto& c : r.conditions) {
        if (!skip_var.empty() && mentions(*c, skip_var)) continue;
        if (!vada::evaluate_condition(*c, EnvScope(env), ctx)) return false;
    }
    return true;
}

inline Value fold(vada::AggregateOp op, const std::vector<Value>& vs) {
    using vada::AggregateOp;
    if (op == AggregateOp::MCount) return Value::integer(static_cast<int64_t>(vs.size()));
    Value acc = vs.at(0);
    for (size_t i = 1; i < vs.size(); ++i) {
        switch (op) {
            case AggregateOp::MSum: acc = vada::arith::add(acc, vs[i]); break;
            case AggregateOp::MProd: acc = vada::arith::mul(acc, vs[i]); break;
            case AggregateOp::Min:
                if (vada::arith::compare(vs[i], acc) < 0) acc = vs[i];
                break;
            case AggregateOp::Max:
                if (vada::arith::compare(vs[i], acc) > 0) acc = vs[i];
                break;
            default: break;
        }
    }
    return acc;
}

/// Head facts of one rule over `db`.
inline std::set<Tuple> apply(const Rule& r, const Instance& db, const vada::EvalContext& ctx) {
    std::set<Tuple> out;
    std::vector<Env> envs;
    Env start;
    bodies(r, 0, db, start, envs);
    auto negation_ok = [&](const Env& env) {
        for (const auto& n : r.negated) {
            auto it = db.find(n.predicate);
            if (it != db.end() && it->second.count(ground(n, env))) return false;
        }
        return true;
    };
    const vada::Assignment* agg = r.aggregate();
    if (!agg) {
        for (auto& env : envs)
            if (finish(r, env, ctx, "") && negation_ok(env)) out.insert(ground(r.head, env));
        return out;
    }
    // group: head variables bound by the body; contribution: the remaining body variables
    auto body_vars = r.body_variables();
    std::vector<std::string> group, rest;
    std::set<std::string> head_vars = r.head.variables();
    for (const auto& v : head_vars)
        if (body_vars.count(v)) group.push_back(v);
    for (const auto& v : body_vars)
        if (!head_vars.count(v)) rest.push_back(v);
    std::map<std::vector<Value>, std::map<std::vector<Value>, Value>> groups;
    for (auto& env : envs) {
        if (!finish(r, env, ctx, agg->variable) || !negation_ok(env)) continue;
        std::vector<Value> g, c;
        for (const auto& v : group) g.push_back(env.at(v));
        for (const auto& v : rest) c.push_back(env.at(v));
        Value x = vada::evaluate(*agg->aggregate->argument, EnvScope(env), ctx);
        groups[g].emplace(c, x);  // distinct contributions count once
    }
    for (const auto& [g, contributions] : groups) {
        std::vector<Value> xs;
        for (const auto& [c, x] : contributions) xs.push_back(x);
        Env env;
        for (size_t i = 0; i < group.size(); ++i) env.emplace(group[i], g[i]);
        env[agg->variable] = fold(agg->aggregate->op, xs);
        bool ok = true;
        for (const auto& c : r.conditions)
            if (mentions(*c, agg->variable) && !vada::evaluate_condition(*c, EnvScope(env), ctx)) ok = false;
        if (ok) out.insert(ground(r.head, env));
    }
    return out;
}

}  // namespace naive_detail

/// Stratum per predicate by relaxation: a negated dependency lifts the head
/// one stratum above the body predicate. Throws on a negative cycle.
inline std::map<std::string, size_t> naive_strata(const Program& p) {
    std::map<std::string, size_t> s;
    for (const auto& [name, arity] : p.arities()) s[name] = 0;
    size_t limit = s.size() + 1;
    for (size_t round = 0;; ++round) {
        bool changed = false;
        for (const auto& r : p.rules) {
            size_t need = 0;
            for (const auto& a : r.body) need = std::max(need, s[a.predicate]);
            for (const auto& a : r.negated) need = std::max(need, s[a.predicate] + 1);
            if (need > s[r.head.predicate]) {
                s[r.head.predicate] = need;
                changed = true;
            }
        }
        if (!changed) return s;
        if (round > limit) throw std::runtime_error("not stratifiable");
    }
}

/// Least model per stratum. Aggregate rules are recomputed from scratch each
/// round, so each group carries only its final value.
inline Instance naive_fixpoint(const Program& p, const std::map<std::string, std::vector<Tuple>>& inputs = {}) {
    for (const auto& r : p.rules)
        if (!r.existential_vars.empty()) throw std::runtime_error("naive oracle has no existential support");
    vada::EvalContext ctx;
    auto strata = naive_strata(p);
    size_t top = 0;
    for (const auto& [name, s] : strata) top = std::max(top, s);

    Instance db;
    for (const auto& f : p.facts) db[f.predicate].insert(vada::fact_from_atom(f).args);
    for (const auto& [name, rows] : inputs) db[name].insert(rows.begin(), rows.end());

    for (size_t s = 0; s <= top; ++s) {
        std::vector<const Rule*> rules;
        for (const auto& r : p.rules)
            if (strata[r.head.predicate] == s) rules.push_back(&r);
        Instance base = db;
        for (size_t round = 0;; ++round) {
            if (round > 100000) throw std::runtime_error("naive oracle did not converge");
            Instance next = base;
            for (const Rule* r : rules) {
                auto facts = naive_detail::apply(*r, db, ctx);
                next[r->head.predicate].insert(facts.begin(), facts.end());
            }
            if (next == db) break;
            db = std::move(next);
        }
    }
    for (const auto& [name, arity] : p.arities()) db[name];
    return db;
}

}  // namespace oracle
