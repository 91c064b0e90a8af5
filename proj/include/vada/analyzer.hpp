#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vada/ast.hpp"

namespace vada {

/// Argument position of a predicate; `index` is 0-based, printed 1-based.
struct Position {
    std::string predicate;
    size_t index = 0;
    auto operator<=>(const Position&) const = default;
};

class PositionSet {
public:
    bool insert(Position p) { return entries_.insert(std::move(p)).second; }
    bool contains(const std::string& predicate, size_t index) const {
        return entries_.count(Position{predicate, index}) > 0;
    }
    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::set<Position>& entries() const { return entries_; }
    /// "{(P,1), (R,2)}"
    std::string to_string() const;
    bool operator==(const PositionSet&) const = default;

private:
    std::set<Position> entries_;
};

/// Positions that may hold a labelled null in some chase.
PositionSet compute_affected_positions(const Program& program);

enum class VarClass { Harmless, Harmful, Dangerous };
std::string_view to_string(VarClass c);

/// One map per rule, in program order.
using VariableClassification = std::vector<std::map<std::string, VarClass>>;

VariableClassification classify_variables(const Program& program, const PositionSet& affected);

struct RuleWardedness {
    size_t rule = 0;
    bool ok = true;
    /// Body index of the chosen ward; empty when the rule has no dangerous variables.
    std::optional<size_t> ward;
    /// 1: dangerous variables split across atoms; 2: the ward shares a harmful variable.
    int violated_condition = 0;
    std::vector<std::string> offending;
    std::string description;
};

struct WardednessReport {
    bool warded = true;
    std::vector<RuleWardedness> rules;
};

WardednessReport check_wardedness(const Program& program);
WardednessReport check_wardedness(const Program& program, const VariableClassification& classes);

struct Stratification {
    std::vector<std::vector<std::string>> strata;
    std::map<std::string, size_t> stratum_of;
};

/// Throws CycleError when a cycle passes through a negated edge.
Stratification stratify(const Program& program);

enum class Severity { Error, Warning };

struct Lint {
    std::string code;
    Severity severity = Severity::Error;
    std::string message;
    SourceSpan span;
};

std::vector<Lint> lint(const Program& program);
bool has_errors(const std::vector<Lint>& lints);
/// `ERROR L1 18:27 message`
std::string format_lint(const Lint& lint);

}  // namespace vada
