#include "compiled.hpp"

#include <algorithm>

namespace vada::detail {

namespace {

size_t slot_of(CompiledRule& r, const std::string& name) {
    auto [it, fresh] = r.var_index.emplace(name, r.var_names.size());
    if (fresh) r.var_names.push_back(name);
    return it->second;
}

CompiledAtom compile_atom(CompiledRule& r, const Atom& atom, const std::map<std::string, size_t>& pred_index) {
    CompiledAtom c;
    c.predicate = atom.predicate;
    auto it = pred_index.find(atom.predicate);
    c.pred = it == pred_index.end() ? SIZE_MAX : it->second;
    for (const auto& t : atom.args) {
        Slot s;
        if (t.is_variable()) {
            s.is_var = true;
            s.var = slot_of(r, t.name);
        } else {
            s.constant = t.value;
        }
        c.args.push_back(std::move(s));
    }
    return c;
}

}  // namespace

CompiledRule compile_rule(const Rule& rule, size_t id, const std::map<std::string, size_t>& pred_index) {
    CompiledRule r;
    r.rule = &rule;
    r.id = id;
    for (const auto& a : rule.body) r.body.push_back(compile_atom(r, a, pred_index));
    std::vector<bool> known(r.var_names.size(), true);
    for (const auto& a : rule.negated) r.negated.push_back(compile_atom(r, a, pred_index));
    for (const auto& a : rule.assignments) {
        for (const auto& v : a.value_expr()->variables()) slot_of(r, v);
        r.assign_slot.push_back(slot_of(r, a.variable));
    }
    std::vector<std::vector<size_t>> cond_vars;
    for (const auto& c : rule.conditions) {
        std::vector<size_t> vs;
        for (const auto& v : c->variables()) vs.push_back(slot_of(r, v));
        cond_vars.push_back(std::move(vs));
    }
    r.head = compile_atom(r, rule.head, pred_index);
    known.resize(r.var_names.size(), false);

    std::vector<bool> placed(rule.conditions.size(), false);
    auto place_ready = [&](std::vector<Step>& out) {
        for (size_t c = 0; c < rule.conditions.size(); ++c) {
            if (placed[c]) continue;
            if (std::all_of(cond_vars[c].begin(), cond_vars[c].end(), [&](size_t s) { return known[s]; })) {
                placed[c] = true;
                out.push_back({Step::Kind::Condition, c});
            }
        }
    };
    auto place_rest = [&](std::vector<Step>& out) {
        for (size_t c = 0; c < rule.conditions.size(); ++c)
            if (!placed[c]) {
                placed[c] = true;
                out.push_back({Step::Kind::Condition, c});
            }
    };

    for (size_t k = 0; k < rule.assignments.size(); ++k)
        if (rule.assignments[k].is_aggregate()) r.aggregate = k;

    place_ready(r.pre);
    size_t k = 0;
    for (; k < rule.assignments.size() && (!r.aggregate || k < *r.aggregate); ++k) {
        r.pre.push_back({Step::Kind::Assign, k});
        known[r.assign_slot[k]] = true;
        place_ready(r.pre);
    }
    r.body_bound = known;
    if (r.aggregate) {
        known[r.assign_slot[*r.aggregate]] = true;
        place_ready(r.post);
        for (++k; k < rule.assignments.size(); ++k) {
            r.post.push_back({Step::Kind::Assign, k});
            known[r.assign_slot[k]] = true;
            place_ready(r.post);
        }
        place_rest(r.post);

        for (const auto& s : r.head.args)
            if (s.is_var && r.body_bound[s.var] &&
                std::find(r.group_slots.begin(), r.group_slots.end(), s.var) == r.group_slots.end())
                r.group_slots.push_back(s.var);
        for (size_t v = 0; v < r.var_names.size(); ++v)
            if (r.body_bound[v] && std::find(r.group_slots.begin(), r.group_slots.end(), v) == r.group_slots.end())
                r.contribution_slots.push_back(v);
    } else {
        place_rest(r.pre);
    }

    for (const auto& name : rule.existential_vars) r.existential_slots.push_back(r.var_index.at(name));
    for (const auto& s : r.head.args)
        r.head_existential.push_back(s.is_var && std::find(r.existential_slots.begin(), r.existential_slots.end(),
                                                           s.var) != r.existential_slots.end());
    return r;
}

std::shared_ptr<const CompiledProgram> compile_program(const Program& source) {
    auto owned = std::make_shared<CompiledProgram>();
    CompiledProgram& c = *owned;
    c.program = source;
    const Program& program = c.program;
    for (const auto& [name, arity] : program.arities()) {
        c.pred_index[name] = c.predicates.size();
        c.predicates.push_back(name);
        c.arity.push_back(arity);
    }
    for (const auto* a : program.annotations_of(Annotation::Kind::Input))
        if (!c.pred_index.count(a->target())) {
            c.pred_index[a->target()] = c.predicates.size();
            c.predicates.push_back(a->target());
            c.arity.push_back(SIZE_MAX);
        }
    for (size_t i = 0; i < program.rules.size(); ++i) c.rules.push_back(compile_rule(program.rules[i], i, c.pred_index));
    return owned;
}

bool unify(const CompiledAtom& atom, const Tuple& tuple, Binding& b, std::vector<size_t>* newly) {
    if (tuple.size() != atom.args.size()) return false;
    size_t mark = newly ? newly->size() : 0;
    std::vector<size_t> local;
    std::vector<size_t>& added = newly ? *newly : local;
    for (size_t i = 0; i < atom.args.size(); ++i) {
        const Slot& s = atom.args[i];
        bool ok;
        if (!s.is_var) {
            ok = s.constant == tuple[i];
        } else if (b.bound[s.var]) {
            ok = b.values[s.var] == tuple[i];
        } else {
            b.set(s.var, tuple[i]);
            added.push_back(s.var);
            ok = true;
        }
        if (!ok) {
            for (size_t j = mark; j < added.size(); ++j) b.bound[added[j]] = 0;
            added.resize(mark);
            return false;
        }
    }
    return true;
}

Tuple instantiate(const CompiledAtom& atom, const Binding& b) {
    Tuple t;
    t.reserve(atom.args.size());
    for (const auto& s : atom.args) {
        if (!s.is_var) {
            t.push_back(s.constant);
        } else {
            if (!b.bound[s.var]) throw EvalError("unbound variable in atom " + atom.predicate);
            t.push_back(b.values[s.var]);
        }
    }
    return t;
}

bool run_steps(const CompiledRule& rule, const std::vector<Step>& steps, Binding& b, const EvalContext& ctx) {
    BindingScope scope(rule, b);
    for (const Step& s : steps) {
        if (s.kind == Step::Kind::Condition) {
            if (!evaluate_condition(*rule.rule->conditions[s.index], scope, ctx)) return false;
            continue;
        }
        const Assignment& a = rule.rule->assignments[s.index];
        Value v = evaluate(*a.expr, scope, ctx);
        size_t slot = rule.assign_slot[s.index];
        if (b.bound[slot]) {
            // A variable already bound by an atom: the assignment acts as an equality test.
            if (!arith::loosely_equal(b.values[slot], v)) return false;
        } else {
            b.set(slot, std::move(v));
        }
    }
    return true;
}

Substitution to_substitution(const CompiledRule& rule, const Binding& b) {
    Substitution s;
    for (size_t i = 0; i < rule.var_names.size(); ++i)
        if (b.bound[i]) s.emplace(rule.var_names[i], b.values[i]);
    return s;
}

}  // namespace vada::detail
