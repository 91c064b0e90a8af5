#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vada/engine.hpp"

namespace vada::detail {

/// An atom argument: a variable slot or a constant.
struct Slot {
    bool is_var = false;
    size_t var = 0;
    Value constant;
};

struct CompiledAtom {
    size_t pred = 0;
    std::string predicate;
    std::vector<Slot> args;
};

struct Step {
    enum class Kind { Assign, Condition };
    Kind kind = Kind::Condition;
    size_t index = 0;  // into Rule::assignments or Rule::conditions
};

struct CompiledRule {
    const Rule* rule = nullptr;
    size_t id = 0;
    std::vector<std::string> var_names;
    std::map<std::string, size_t, std::less<>> var_index;
    std::vector<CompiledAtom> body;
    std::vector<CompiledAtom> negated;
    CompiledAtom head;
    std::vector<size_t> assign_slot;
    std::vector<Step> pre;
    std::vector<Step> post;
    std::optional<size_t> aggregate;  // assignment index
    std::vector<size_t> group_slots;
    std::vector<size_t> contribution_slots;
    std::vector<size_t> existential_slots;
    std::vector<bool> head_existential;
    /// Variables bound by body atoms and pre-aggregate assignments.
    std::vector<bool> body_bound;
};

struct CompiledProgram {
    Program program;  // owns the rules referenced below
    std::vector<std::string> predicates;
    std::map<std::string, size_t> pred_index;
    std::vector<size_t> arity;
    std::vector<CompiledRule> rules;
};

CompiledRule compile_rule(const Rule& rule, size_t id, const std::map<std::string, size_t>& pred_index);
std::shared_ptr<const CompiledProgram> compile_program(const Program& program);

struct Binding {
    std::vector<Value> values;
    std::vector<char> bound;

    explicit Binding(size_t n = 0) : values(n), bound(n, 0) {}
    void set(size_t slot, Value v) {
        values[slot] = std::move(v);
        bound[slot] = 1;
    }
};

class BindingScope : public Scope {
public:
    BindingScope(const CompiledRule& rule, const Binding& binding) : rule_(rule), binding_(binding) {}
    const Value* lookup(std::string_view name) const override {
        auto it = rule_.var_index.find(name);
        if (it == rule_.var_index.end() || !binding_.bound[it->second]) return nullptr;
        return &binding_.values[it->second];
    }

private:
    const CompiledRule& rule_;
    const Binding& binding_;
};

/// Binds `atom` against `tuple`; false on a constant or repeated-variable clash.
/// Slots bound by this call are appended to `newly`.
bool unify(const CompiledAtom& atom, const Tuple& tuple, Binding& b, std::vector<size_t>* newly = nullptr);

/// Ground tuple of an atom whose variables are all bound.
Tuple instantiate(const CompiledAtom& atom, const Binding& b);

/// Runs assignment/condition steps; false when a condition fails.
bool run_steps(const CompiledRule& rule, const std::vector<Step>& steps, Binding& b, const EvalContext& ctx);

Substitution to_substitution(const CompiledRule& rule, const Binding& b);

}  // namespace vada::detail
