#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "vada/ast.hpp"
#include "vada/engine.hpp"

namespace vada {

/// One choice of soft rules; `included[i]` refers to the i-th soft rule.
struct World {
    std::vector<bool> included;
    double probability = 1.0;
};

struct MarginalEstimate {
    enum class Method { Exact, MonteCarlo };

    Atom query;
    double p = 0.0;
    Method method = Method::Exact;
    size_t samples = 0;
    uint64_t seed = 0;
    double half_width = 0.0;
    size_t worlds_evaluated = 0;

    /// "p=<v> method=<exact|mc> ci=<w>"
    std::string to_string() const;
};

/// A program whose rules may carry weights. Hard rules are always present;
/// each soft rule is included independently with its weight.
class SoftProgram {
public:
    explicit SoftProgram(Program program, Inputs inputs = {}, EngineOptions options = {});

    const Program& program() const { return plan_.program(); }
    size_t soft_count() const { return soft_.size(); }
    /// Program::rules index of the i-th soft rule.
    size_t soft_rule(size_t i) const { return soft_[i]; }
    double weight(size_t i) const;

    double probability(const std::vector<bool>& included) const;
    /// Runs the engine on the hard rules plus the included soft rules.
    RunResult run_world(const std::vector<bool>& included, const std::set<std::string>& roots = {}) const;
    /// True when some fact of the world's result matches `query`; variables match anything.
    bool entails(const std::vector<bool>& included, const Atom& query) const;

private:
    Plan plan_;
    Inputs inputs_;
    EngineOptions options_;
    std::vector<size_t> soft_;
};

/// Matches a possibly non-ground atom against a tuple; repeated variables must agree.
bool matches(const Atom& pattern, const Tuple& tuple);

/// All 2^k worlds in binary-counter order. Throws CapExceeded when k > cap.
std::vector<World> enumerate_worlds(const SoftProgram& program, size_t cap = 20);

MarginalEstimate enumerate_marginal(const SoftProgram& program, const Atom& query, size_t cap = 20);

/// Source of sampled worlds; the default draws each soft rule independently.
class WorldSampler {
public:
    virtual ~WorldSampler() = default;
    virtual std::vector<bool> next() = 0;
};

class IndependentSampler : public WorldSampler {
public:
    IndependentSampler(std::vector<double> weights, uint64_t seed);
    std::vector<bool> next() override;

private:
    std::vector<double> weights_;
    std::mt19937_64 rng_;
};

MarginalEstimate sample_marginal(const SoftProgram& program, const Atom& query, size_t samples, uint64_t seed);
MarginalEstimate sample_marginal(const SoftProgram& program, const Atom& query, size_t samples,
                                 WorldSampler& sampler);

}  // namespace vada
