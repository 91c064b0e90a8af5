#include "vada/explain.hpp"

#include <set>

#include <json.hpp>

#include "vada/parser.hpp"

namespace vada {

NodeId DerivationStore::record(DerivationNode node) {
    auto& ids = by_fact_[node.fact];
    if (!ids.empty() && !keep_all_) return ids.front();
    auto id = static_cast<NodeId>(nodes_.size());
    ids.push_back(id);
    nodes_.push_back(std::move(node));
    return id;
}

std::optional<NodeId> DerivationStore::find(const Fact& fact) const {
    auto it = by_fact_.find(fact);
    if (it == by_fact_.end() || it->second.empty()) return std::nullopt;
    return it->second.front();
}

std::vector<NodeId> DerivationStore::derivations(const Fact& fact) const {
    auto it = by_fact_.find(fact);
    return it == by_fact_.end() ? std::vector<NodeId>{} : it->second;
}

namespace {

Explanation build(const DerivationStore& store, const Program& program, NodeId id) {
    const DerivationNode& n = store.node(id);
    Explanation e;
    e.fact = n.fact;
    if (n.kind == DerivationNode::Kind::Edb) return e;
    e.edb = false;
    e.rule = n.rule;
    e.rule_text = format_rule(program.rules.at(n.rule));
    std::vector<NodeId> parents = n.parents;
    if (n.is_aggregate()) {
        std::set<NodeId> seen;
        for (size_t i = 0; i < n.contribution_count; ++i)
            for (NodeId p : (*n.contributions)[i].parents)
                if (seen.insert(p).second) parents.push_back(p);
    }
    for (NodeId p : parents) e.children.push_back(build(store, program, p));
    return e;
}

void render_into(const Explanation& e, int depth, std::string& out) {
    std::string pad(static_cast<size_t>(depth) * 2, ' ');
    if (e.edb) {
        out += pad + e.fact.to_string() + "\n";
        return;
    }
    out += pad + e.fact.to_string() + " <- rule_" + std::to_string(e.rule + 1) + " {\n";
    for (const auto& c : e.children) render_into(c, depth + 1, out);
    out += pad + "}\n";
}

nlohmann::json json_of(const Explanation& e) {
    nlohmann::json j;
    j["fact"] = e.fact.to_string();
    if (e.edb) {
        j["kind"] = "input";
        return j;
    }
    j["kind"] = "rule";
    j["rule"] = e.rule + 1;
    j["rule_text"] = e.rule_text;
    j["body"] = nlohmann::json::array();
    for (const auto& c : e.children) j["body"].push_back(json_of(c));
    return j;
}

}  // namespace

Explanation explain(const DerivationStore& store, const Program& program, const Fact& fact) {
    auto id = store.find(fact);
    if (!id) throw NotDerived("not derived: " + fact.to_string());
    return build(store, program, *id);
}

std::string render(const Explanation& explanation) {
    std::string out;
    render_into(explanation, 0, out);
    return out;
}

std::string to_json(const Explanation& explanation, int indent) { return json_of(explanation).dump(indent); }

}  // namespace vada
