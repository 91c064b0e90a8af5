#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vada/ast.hpp"
#include "vada/fact.hpp"

namespace vada {

using Substitution = std::map<std::string, Value>;
using NodeId = uint32_t;

/// One absorbed aggregate contribution: the body substitution and the facts it matched.
struct Contribution {
    Substitution binding;
    std::vector<NodeId> parents;
};

struct DerivationNode {
    enum class Kind { Edb, Rule };

    Fact fact;
    Kind kind = Kind::Edb;
    size_t rule = 0;  // index into Program::rules
    Substitution substitution;
    std::vector<NodeId> parents;
    /// Aggregate heads: the first `contribution_count` entries of a group's
    /// shared contribution list produced this value.
    std::shared_ptr<const std::vector<Contribution>> contributions;
    size_t contribution_count = 0;

    bool is_aggregate() const { return contributions != nullptr; }
};

class DerivationStore {
public:
    explicit DerivationStore(bool keep_all = false) : keep_all_(keep_all) {}

    /// Parents must already be recorded. With first-derivation policy a second
    /// derivation of a known fact returns the existing id.
    NodeId record(DerivationNode node);

    const DerivationNode& node(NodeId id) const { return nodes_.at(id); }
    size_t size() const { return nodes_.size(); }
    std::optional<NodeId> find(const Fact& fact) const;
    std::vector<NodeId> derivations(const Fact& fact) const;
    bool keeps_all() const { return keep_all_; }

private:
    bool keep_all_;
    std::vector<DerivationNode> nodes_;
    std::unordered_map<Fact, std::vector<NodeId>, FactHash> by_fact_;
};

struct Explanation {
    Fact fact;
    bool edb = true;
    size_t rule = 0;
    std::string rule_text;
    std::vector<Explanation> children;
};

/// Throws NotDerived when the fact has no recorded derivation.
Explanation explain(const DerivationStore& store, const Program& program, const Fact& fact);

/// `fact <- rule_k {` blocks; input facts print as bare leaves.
std::string render(const Explanation& explanation);
std::string to_json(const Explanation& explanation, int indent = 2);

}  // namespace vada
