#include <algorithm>

#include "compiled.hpp"
#include "vada/engine.hpp"

namespace vada {

namespace {

using detail::Binding;
using detail::CompiledAtom;
using detail::CompiledRule;

/// Append-only fact store with lazily built hash indexes per bound-position mask.
class Relation {
public:
    struct Index {
        std::unordered_map<Tuple, std::vector<uint32_t>, TupleHash> map;
        size_t upto = 0;
    };

    bool contains(const Tuple& t) const { return ids_.count(t) > 0; }
    size_t size() const { return tuples_.size(); }
    const Tuple& at(size_t seq) const { return tuples_[seq]; }
    NodeId node(size_t seq) const { return nodes_[seq]; }

    size_t add(Tuple t, NodeId node) {
        size_t seq = tuples_.size();
        ids_.emplace(t, static_cast<uint32_t>(seq));
        tuples_.push_back(std::move(t));
        nodes_.push_back(node);
        superseded_.push_back(0);
        return seq;
    }

    void supersede(size_t seq) { superseded_[seq] = 1; }
    bool superseded(size_t seq) const { return superseded_[seq] != 0; }

    static Tuple key(const Tuple& t, uint64_t mask) {
        Tuple k;
        for (size_t i = 0; i < t.size(); ++i)
            if (mask >> i & 1) k.push_back(t[i]);
        return k;
    }

    Index& index(uint64_t mask) {
        Index& ix = indexes_[mask];
        for (; ix.upto < tuples_.size(); ++ix.upto)
            ix.map[key(tuples_[ix.upto], mask)].push_back(static_cast<uint32_t>(ix.upto));
        return ix;
    }

private:
    std::vector<Tuple> tuples_;
    std::vector<NodeId> nodes_;
    std::vector<char> superseded_;
    std::unordered_map<Tuple, uint32_t, TupleHash> ids_;
    std::unordered_map<uint64_t, Index> indexes_;
};

struct PredState {
    std::string name;
    bool retained = false;
    bool negated = false;
    Relation rel;
    FactCache cache;
    size_t admitted = 0;
    std::vector<const Tuple*> source;
    size_t source_pos = 0;
    std::vector<size_t> producers;
    size_t rr = 0;
    bool pulling = false;
    std::unordered_set<Tuple, TupleHash> history;
    std::optional<size_t> driver;
    size_t stratum = 0;
};

struct RuleState {
    std::vector<size_t> consumers;  // per body atom
    size_t rr = 0;
    bool fired = false;
    std::optional<AggregateState> agg;
    std::unordered_map<Tuple, std::shared_ptr<std::vector<Contribution>>, TupleHash> contributions;
    std::unordered_map<Tuple, size_t, TupleHash> last_emission;
};

struct Parents {
    std::vector<NodeId> ids;
};

class Evaluation {
public:
    Evaluation(const detail::CompiledProgram& cp, const Plan& plan, const Inputs& inputs, const EngineOptions& opt)
        : cp_(cp), plan_(plan), opt_(opt), ctx_(plan.context()) {
        if (opt.provenance) store_ = std::make_shared<DerivationStore>(opt.keep_all_derivations);
        preds_.resize(cp.predicates.size());
        for (size_t p = 0; p < preds_.size(); ++p) {
            auto& ps = preds_[p];
            ps.name = cp.predicates[p];
            ps.retained = opt.provenance || plan.retained().count(ps.name) || opt.extra_roots.count(ps.name);
            auto it = plan.strata().stratum_of.find(ps.name);
            ps.stratum = it == plan.strata().stratum_of.end() ? 0 : it->second;
        }
        for (const auto& f : cp.program.facts) pred(f.predicate).source.push_back(intern(fact_from_atom(f).args));
        for (const auto& [name, tuples] : inputs) {
            auto it = cp.pred_index.find(name);
            if (it == cp.pred_index.end()) continue;
            for (const auto& t : tuples) {
                if (cp.arity[it->second] != SIZE_MAX && t.size() != cp.arity[it->second])
                    throw SchemaError("input for " + name + " has " + std::to_string(t.size()) +
                                          " columns, expected " + std::to_string(cp.arity[it->second]),
                                      0);
                preds_[it->second].source.push_back(&t);
            }
        }

        auto enabled = [&](size_t r) { return r >= opt.disabled_rules.size() || !opt.disabled_rules[r]; };

        // Needed predicates: backward closure from the roots over enabled rules.
        std::set<std::string> roots = plan.roots();
        roots.insert(opt.extra_roots.begin(), opt.extra_roots.end());
        std::vector<bool> needed(preds_.size(), false);
        std::vector<size_t> stack;
        for (const auto& r : roots) {
            auto it = cp.pred_index.find(r);
            if (it != cp.pred_index.end() && !needed[it->second]) {
                needed[it->second] = true;
                stack.push_back(it->second);
            }
        }
        std::vector<std::vector<size_t>> rules_of(preds_.size());
        for (const auto& rule : cp.rules)
            if (enabled(rule.id)) rules_of[rule.head.pred].push_back(rule.id);
        while (!stack.empty()) {
            size_t p = stack.back();
            stack.pop_back();
            for (size_t r : rules_of[p]) {
                const auto& rule = cp.rules[r];
                for (const auto* list : {&rule.body, &rule.negated})
                    for (const auto& a : *list)
                        if (!needed[a.pred]) {
                            needed[a.pred] = true;
                            stack.push_back(a.pred);
                        }
            }
        }

        rules_.resize(cp.rules.size());
        stats_.rule_firings.assign(cp.rules.size(), 0);
        for (const auto& rule : cp.rules) {
            if (!enabled(rule.id) || !needed[rule.head.pred]) continue;
            preds_[rule.head.pred].producers.push_back(rule.id);
            RuleState& rs = rules_[rule.id];
            for (const auto& a : rule.body) rs.consumers.push_back(preds_[a.pred].cache.add_consumer());
            for (const auto& a : rule.negated) preds_[a.pred].negated = true;
            if (rule.aggregate) rs.agg.emplace(rule.rule->assignments[*rule.aggregate].aggregate->op);
        }
        for (size_t p = 0; p < preds_.size(); ++p) {
            if (!needed[p]) continue;
            if (roots.count(preds_[p].name) || preds_[p].negated) {
                preds_[p].driver = preds_[p].cache.add_consumer();
                drivers_.push_back(p);
            }
        }
        std::stable_sort(drivers_.begin(), drivers_.end(),
                         [&](size_t a, size_t b) { return preds_[a].stratum < preds_[b].stratum; });
    }

    RunResult finish() {
        size_t top = 0;
        for (size_t p : drivers_) top = std::max(top, preds_[p].stratum);
        std::vector<std::pair<size_t, size_t>> closed;  // negated predicate, size at close
        for (size_t s = 0; s <= top && !drivers_.empty(); ++s) {
            for (bool progress = true; progress;) {
                progress = false;
                for (size_t p : drivers_) {
                    if (preds_[p].stratum != s) continue;
                    while (pull(p, *preds_[p].driver)) progress = true;
                }
            }
            for (size_t p = 0; p < preds_.size(); ++p)
                if (preds_[p].negated && preds_[p].stratum == s) closed.emplace_back(p, preds_[p].admitted);
        }
        for (auto [p, n] : closed) stats_.late_negated_facts += preds_[p].admitted - n;

        RunResult result;
        for (const auto& r : plan_.roots()) result.outputs.insert(r);
        for (const auto& ps : preds_) {
            stats_.facts_per_predicate[ps.name] = ps.admitted;
            if (!ps.retained) continue;
            std::vector<Tuple> view;
            for (size_t i = 0; i < ps.rel.size(); ++i)
                if (!ps.rel.superseded(i)) view.push_back(ps.rel.at(i));
            std::sort(view.begin(), view.end());
            result.relations[ps.name] = std::move(view);
        }
        result.stats = stats_;
        result.trace = std::move(trace_);
        result.provenance = store_;
        return result;
    }

private:
    PredState& pred(const std::string& name) { return preds_[cp_.pred_index.at(name)]; }

    const Tuple* intern(Tuple t) {
        owned_.push_back(std::make_unique<Tuple>(std::move(t)));
        return owned_.back().get();
    }

    bool read_source(size_t p) {
        PredState& ps = preds_[p];
        while (ps.source_pos < ps.source.size()) {
            const Tuple& t = *ps.source[ps.source_pos++];
            if (admit(p, t, [&](DerivationNode& n) { n.kind = DerivationNode::Kind::Edb; }, 0)) return true;
        }
        return false;
    }

    std::optional<CachedFact> take(size_t p, size_t consumer) {
        PredState& ps = preds_[p];
        const CachedFact* f = ps.cache.next(consumer);
        CachedFact copy = *f;
        if (opt_.eviction) {
            size_t n = ps.cache.evict();
            resident_ -= n;
            stats_.evicted += n;
        }
        return copy;
    }

    std::optional<CachedFact> pull(size_t p, size_t consumer) {
        PredState& ps = preds_[p];
        for (;;) {
            if (ps.cache.has_next(consumer)) return take(p, consumer);
            if (read_source(p)) continue;
            if (ps.pulling || ps.producers.empty()) return std::nullopt;
            ps.pulling = true;
            bool progressed = true;
            while (!ps.cache.has_next(consumer) && progressed) {
                if (read_source(p)) break;
                progressed = false;
                for (size_t k = 0; k < ps.producers.size(); ++k) {
                    size_t r = ps.producers[ps.rr];
                    ps.rr = (ps.rr + 1) % ps.producers.size();
                    if (step(r)) progressed = true;
                    if (ps.cache.has_next(consumer)) break;
                }
            }
            ps.pulling = false;
            if (!ps.cache.has_next(consumer)) return std::nullopt;
        }
    }

    bool step(size_t r) {
        const CompiledRule& rule = cp_.rules[r];
        RuleState& rs = rules_[r];
        size_t n = rule.body.size();
        if (n == 0) {
            if (rs.fired) return false;
            rs.fired = true;
            Binding b(rule.var_names.size());
            Parents parents;
            fire(rule, b, parents);
            return true;
        }
        for (size_t i = 0; i < n; ++i) {
            size_t j = (rs.rr + i) % n;
            auto f = pull(rule.body[j].pred, rs.consumers[j]);
            if (!f) continue;
            rs.rr = (j + 1) % n;
            Binding b(rule.var_names.size());
            if (detail::unify(rule.body[j], f->tuple, b)) {
                Parents parents;
                parents.ids.assign(n, 0);
                parents.ids[j] = f->node;
                join(rule, j, 0, b, parents);
            }
            return true;
        }
        return false;
    }

    /// Extends the binding over body atoms other than `fixed`, probing each
    /// atom only among facts its consumer has already read.
    void join(const CompiledRule& rule, size_t fixed, size_t next, Binding& b, Parents& parents) {
        if (next == fixed) ++next;
        if (next >= rule.body.size()) {
            fire(rule, b, parents);
            return;
        }
        const CompiledAtom& atom = rule.body[next];
        PredState& ps = preds_[atom.pred];
        size_t limit = ps.cache.cursor(rules_[rule.id].consumers[next]);
        uint64_t mask = 0;
        Tuple key;
        for (size_t i = 0; i < atom.args.size(); ++i) {
            const auto& s = atom.args[i];
            if (!s.is_var) {
                mask |= uint64_t{1} << i;
                key.push_back(s.constant);
            } else if (b.bound[s.var]) {
                mask |= uint64_t{1} << i;
                key.push_back(b.values[s.var]);
            }
        }
        auto visit = [&](size_t seq) {
            Tuple t = ps.rel.at(seq);
            std::vector<size_t> added;
            if (!detail::unify(atom, t, b, &added)) return;
            parents.ids[next] = ps.rel.node(seq);
            join(rule, fixed, next + 1, b, parents);
            for (size_t s : added) b.bound[s] = 0;
        };
        if (mask == 0) {
            for (size_t seq = 0; seq < limit; ++seq) visit(seq);
            return;
        }
        Relation::Index& ix = ps.rel.index(mask);
        auto it = ix.map.find(key);
        if (it == ix.map.end()) return;
        const std::vector<uint32_t>& seqs = it->second;
        for (size_t k = 0; k < seqs.size(); ++k) {
            size_t seq = seqs[k];
            if (seq >= limit) break;
            visit(seq);
        }
    }

    uint32_t depth_of(const CompiledRule& rule, const Binding& b) const {
        uint32_t d = 0;
        for (size_t v = 0; v < rule.var_names.size(); ++v)
            if (b.bound[v] && b.values[v].is_null()) {
                uint64_t id = b.values[v].null_id();
                if (id < null_depth_.size()) d = std::max(d, null_depth_[id]);
            }
        return d;
    }

    void fire(const CompiledRule& rule, const Binding& body, const Parents& parents) {
        // assignments and existential witnesses bind slots; keep the join's binding clean
        Binding b = body;
        if (!detail::run_steps(rule, rule.pre, b, ctx_)) return;
        for (const auto& n : rule.negated)
            if (preds_[n.pred].rel.contains(detail::instantiate(n, b))) return;

        RuleState& rs = rules_[rule.id];
        if (!rule.aggregate) {
            emit(rule, b, [&](DerivationNode& node) {
                node.kind = DerivationNode::Kind::Rule;
                node.rule = rule.id;
                node.parents = parents.ids;
            });
            return;
        }

        const Assignment& agg = rule.rule->assignments[*rule.aggregate];
        Value value = evaluate(*agg.aggregate->argument, detail::BindingScope(rule, b), ctx_);
        Tuple group, contribution;
        for (size_t s : rule.group_slots) group.push_back(b.values[s]);
        for (size_t s : rule.contribution_slots) contribution.push_back(b.values[s]);
        size_t before = rs.agg->contributions(group);
        auto changed = rs.agg->update(group, contribution, value);
        bool absorbed = rs.agg->contributions(group) > before;
        std::shared_ptr<std::vector<Contribution>> list;
        if (store_ && absorbed) {
            auto& slot = rs.contributions[group];
            if (!slot) slot = std::make_shared<std::vector<Contribution>>();
            slot->push_back({detail::to_substitution(rule, b), parents.ids});
            list = slot;
        }
        if (!changed) return;
        size_t agg_slot = rule.assign_slot[*rule.aggregate];
        Binding out = b;
        out.set(agg_slot, *changed);
        if (!detail::run_steps(rule, rule.post, out, ctx_)) return;
        auto seq = emit(rule, out, [&](DerivationNode& node) {
            node.kind = DerivationNode::Kind::Rule;
            node.rule = rule.id;
            node.contributions = list;
            node.contribution_count = list ? list->size() : 0;
        });
        if (seq && preds_[rule.head.pred].retained) {
            auto [it, fresh] = rs.last_emission.try_emplace(group, *seq);
            if (!fresh) {
                preds_[rule.head.pred].rel.supersede(it->second);
                it->second = *seq;
            }
        }
    }

    template <class Describe>
    std::optional<size_t> emit(const CompiledRule& rule, Binding& b, Describe&& describe) {
        ++stats_.rule_firings[rule.id];
        PredState& head = preds_[rule.head.pred];
        uint32_t depth = depth_of(rule, b);
        uint64_t mark = next_null_;
        if (!rule.existential_slots.empty()) {
            // Restricted chase: skip when some head fact already covers the frontier.
            uint64_t mask = 0;
            Tuple key;
            for (size_t i = 0; i < rule.head.args.size(); ++i)
                if (!rule.head_existential[i]) {
                    mask |= uint64_t{1} << i;
                    const auto& s = rule.head.args[i];
                    key.push_back(s.is_var ? b.values[s.var] : s.constant);
                }
            auto satisfied = [&](size_t seq) {
                Binding probe = b;
                return detail::unify(rule.head, head.rel.at(seq), probe);
            };
            bool covered = false;
            if (mask == 0) {
                for (size_t seq = 0; seq < head.rel.size() && !covered; ++seq) covered = satisfied(seq);
            } else {
                auto& ix = head.rel.index(mask);
                auto it = ix.map.find(key);
                if (it != ix.map.end())
                    for (uint32_t seq : it->second)
                        if ((covered = satisfied(seq))) break;
            }
            if (covered) {
                ++stats_.satisfied;
                return std::nullopt;
            }
            ++depth;
            for (size_t s : rule.existential_slots) b.set(s, Value::null(next_null_++));
        }
        Tuple t = detail::instantiate(rule.head, b);
        auto seq = admit(rule.head.pred, t, [&](DerivationNode& n) {
            describe(n);
            n.substitution = detail::to_substitution(rule, b);
        }, depth);
        if (!seq) {
            next_null_ = mark;
            for (size_t s : rule.existential_slots) b.bound[s] = 0;
            return std::nullopt;
        }
        if (null_depth_.size() < next_null_) null_depth_.resize(next_null_, 0);
        for (uint64_t id = mark; id < next_null_; ++id) null_depth_[id] = depth;
        stats_.nulls += next_null_ - mark;
        return seq;
    }

    template <class Describe>
    std::optional<size_t> admit(size_t p, const Tuple& t, Describe&& describe, uint32_t depth) {
        PredState& ps = preds_[p];
        if (ps.retained && ps.rel.contains(t)) {
            ++stats_.duplicates;
            if (store_ && store_->keeps_all()) record(p, t, describe);
            return std::nullopt;
        }
        if (contains_null(t)) {
            if (terminate_check(t, ps.history, depth, opt_.null_depth) == Verdict::Suppress) {
                if (depth > opt_.null_depth)
                    ++stats_.depth_suppressed;
                else
                    ++stats_.suppressed;
                if (opt_.trace) trace_.push_back({Fact{ps.name, t}, false});
                return std::nullopt;
            }
            ps.history.insert(canonical_pattern(t));
        }
        NodeId node = store_ ? record(p, t, describe) : 0;
        size_t seq = ps.admitted++;
        if (ps.retained) ps.rel.add(t, node);
        if (ps.cache.consumers() > 0) {
            ps.cache.append({t, node});
            if (++resident_ > stats_.peak_cache) stats_.peak_cache = resident_;
            if (opt_.cache_limit && resident_ > opt_.cache_limit)
                throw ResourceError("cache limit of " + std::to_string(opt_.cache_limit) + " resident facts exceeded");
        }
        ++stats_.streamed;
        if (++stats_.facts_admitted > opt_.max_facts)
            throw ResourceError("fact limit of " + std::to_string(opt_.max_facts) + " exceeded");
        if (opt_.trace) trace_.push_back({Fact{ps.name, t}, true});
        return seq;
    }

    template <class Describe>
    NodeId record(size_t p, const Tuple& t, Describe&& describe) {
        DerivationNode n;
        n.fact = Fact{preds_[p].name, t};
        describe(n);
        return store_->record(std::move(n));
    }

    const detail::CompiledProgram& cp_;
    const Plan& plan_;
    const EngineOptions& opt_;
    const EvalContext& ctx_;
    std::vector<PredState> preds_;
    std::vector<RuleState> rules_;
    std::vector<size_t> drivers_;
    std::vector<std::unique_ptr<Tuple>> owned_;
    std::vector<uint32_t> null_depth_;
    uint64_t next_null_ = 1;
    size_t resident_ = 0;
    RunStats stats_;
    std::vector<TraceEvent> trace_;
    std::shared_ptr<DerivationStore> store_;
};

}  // namespace

RunResult run(const Plan& plan, const Inputs& inputs, const EngineOptions& options) {
    Evaluation ev(*plan.compiled_, plan, inputs, options);
    return ev.finish();
}

std::map<std::string, size_t> RunStats::to_map() const {
    std::map<std::string, size_t> m;
    for (const auto& [p, n] : facts_per_predicate) m["facts." + p] = n;
    for (size_t r = 0; r < rule_firings.size(); ++r) m["rule." + std::to_string(r + 1) + ".firings"] = rule_firings[r];
    m["facts_admitted"] = facts_admitted;
    m["duplicates"] = duplicates;
    m["suppressed"] = suppressed;
    m["depth_suppressed"] = depth_suppressed;
    m["satisfied"] = satisfied;
    m["nulls"] = nulls;
    m["streamed"] = streamed;
    m["evicted"] = evicted;
    m["peak_cache"] = peak_cache;
    m["late_negated_facts"] = late_negated_facts;
    return m;
}

const std::vector<Tuple>& RunResult::facts(const std::string& predicate) const {
    static const std::vector<Tuple> empty;
    auto it = relations.find(predicate);
    return it == relations.end() ? empty : it->second;
}

bool RunResult::contains(const Fact& fact) const {
    const auto& v = facts(fact.predicate);
    return std::binary_search(v.begin(), v.end(), fact.args);
}

std::vector<Tuple> certain_answers(const std::vector<Tuple>& tuples) {
    std::vector<Tuple> out;
    for (const auto& t : tuples)
        if (!contains_null(t)) out.push_back(t);
    return out;
}

}  // namespace vada
