#include <algorithm>
#include <sstream>

#include "vada/analyzer.hpp"

namespace vada {

namespace {

using VarSet = std::set<std::string>;

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += names[i];
    }
    return out;
}

/// Body variables all of whose positive occurrences sit in affected positions,
/// plus assigned variables whose expression mentions one of them.
VarSet harmful_variables(const Rule& rule, const PositionSet& affected) {
    std::map<std::string, bool> only_affected;
    for (const auto& atom : rule.body)
        for (size_t i = 0; i < atom.args.size(); ++i) {
            const Term& t = atom.args[i];
            if (!t.is_variable()) continue;
            bool aff = affected.contains(atom.predicate, i);
            auto [it, fresh] = only_affected.emplace(t.name, aff);
            if (!fresh) it->second = it->second && aff;
        }
    VarSet harmful;
    for (const auto& [name, aff] : only_affected)
        if (aff) harmful.insert(name);
    // Aggregates yield numbers, never nulls.
    for (const auto& a : rule.assignments) {
        if (a.is_aggregate() || only_affected.count(a.variable)) continue;
        for (const auto& v : a.expr->variables())
            if (harmful.count(v)) {
                harmful.insert(a.variable);
                break;
            }
    }
    return harmful;
}

}  // namespace

std::string PositionSet::to_string() const {
    std::ostringstream out;
    out << '{';
    bool first = true;
    for (const auto& p : entries_) {
        if (!first) out << ", ";
        first = false;
        out << '(' << p.predicate << ',' << p.index + 1 << ')';
    }
    out << '}';
    return out.str();
}

std::string_view to_string(VarClass c) {
    switch (c) {
        case VarClass::Harmless: return "harmless";
        case VarClass::Harmful: return "harmful";
        case VarClass::Dangerous: return "dangerous";
    }
    return "?";
}

PositionSet compute_affected_positions(const Program& program) {
    PositionSet affected;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& rule : program.rules) {
            VarSet harmful = harmful_variables(rule, affected);
            const auto& ex = rule.existential_vars;
            for (size_t i = 0; i < rule.head.args.size(); ++i) {
                const Term& t = rule.head.args[i];
                if (!t.is_variable()) continue;
                bool is_ex = std::find(ex.begin(), ex.end(), t.name) != ex.end();
                if (is_ex || harmful.count(t.name)) changed |= affected.insert({rule.head.predicate, i});
            }
        }
    }
    return affected;
}

VariableClassification classify_variables(const Program& program, const PositionSet& affected) {
    VariableClassification out;
    for (const auto& rule : program.rules) {
        VarSet harmful = harmful_variables(rule, affected);
        VarSet head = rule.head.variables();
        std::map<std::string, VarClass> classes;
        auto put = [&](const std::string& v) {
            if (!harmful.count(v))
                classes[v] = VarClass::Harmless;
            else
                classes[v] = head.count(v) ? VarClass::Dangerous : VarClass::Harmful;
        };
        for (const auto& v : rule.body_variables()) put(v);
        for (const auto& a : rule.assignments) put(a.variable);
        out.push_back(std::move(classes));
    }
    return out;
}

WardednessReport check_wardedness(const Program& program) {
    return check_wardedness(program, classify_variables(program, compute_affected_positions(program)));
}

WardednessReport check_wardedness(const Program& program, const VariableClassification& classes) {
    WardednessReport report;
    for (size_t r = 0; r < program.rules.size(); ++r) {
        const Rule& rule = program.rules[r];
        const auto& cls = classes[r];
        VarSet body_vars = rule.body_variables();
        auto is_harmless = [&](const std::string& v) {
            auto it = cls.find(v);
            return it == cls.end() || it->second == VarClass::Harmless;
        };

        // Dangerous variables as they must appear in atoms; a dangerous assigned
        // variable drags in the harmful body variables it is computed from.
        VarSet dangerous;
        for (const auto& [v, c] : cls) {
            if (c != VarClass::Dangerous) continue;
            if (body_vars.count(v)) {
                dangerous.insert(v);
                continue;
            }
            for (const auto& a : rule.assignments)
                if (a.variable == v)
                    for (const auto& u : a.value_expr()->variables())
                        if (body_vars.count(u) && !is_harmless(u)) dangerous.insert(u);
        }

        RuleWardedness rw;
        rw.rule = r;
        if (dangerous.empty()) {
            rw.description = "no dangerous variables";
            report.rules.push_back(std::move(rw));
            continue;
        }

        std::optional<size_t> first_candidate;
        std::vector<std::string> first_shared;
        for (size_t i = 0; i < rule.body.size(); ++i) {
            VarSet vars = rule.body[i].variables();
            if (!std::includes(vars.begin(), vars.end(), dangerous.begin(), dangerous.end())) continue;
            std::vector<std::string> bad;
            for (const auto& v : vars)
                if (!is_harmless(v)) {
                    bool shared = false;
                    for (size_t j = 0; j < rule.body.size() && !shared; ++j)
                        if (j != i && rule.body[j].variables().count(v)) shared = true;
                    if (shared) bad.push_back(v);
                }
            if (bad.empty()) {
                rw.ward = i;
                break;
            }
            if (!first_candidate) {
                first_candidate = i;
                first_shared = bad;
            }
        }
        if (!rw.ward) {
            rw.ok = false;
            report.warded = false;
            if (!first_candidate) {
                rw.violated_condition = 1;
                rw.offending.assign(dangerous.begin(), dangerous.end());
                rw.description = "dangerous variables " + join_names(rw.offending) +
                                 " do not occur together in a single body atom";
            } else {
                rw.violated_condition = 2;
                rw.offending = first_shared;
                rw.description = "ward candidate " + rule.body[*first_candidate].predicate +
                                 " shares harmful variables " + join_names(first_shared) +
                                 " with the rest of the body";
            }
        } else {
            rw.description = "ward " + rule.body[*rw.ward].predicate;
        }
        report.rules.push_back(std::move(rw));
    }
    return report;
}

}  // namespace vada
