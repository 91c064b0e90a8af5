#include "vada/soft.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "vada/error.hpp"
#include "vada/parser.hpp"

namespace vada {

std::string MarginalEstimate::to_string() const {
    std::ostringstream out;
    out << "p=" << format_double(p) << " method=" << (method == Method::Exact ? "exact" : "mc")
        << " ci=" << format_double(half_width);
    return out.str();
}

SoftProgram::SoftProgram(Program program, Inputs inputs, EngineOptions options)
    : plan_(plan(program)), inputs_(std::move(inputs)), options_(std::move(options)) {
    const auto& rules = plan_.program().rules;
    for (size_t i = 0; i < rules.size(); ++i) {
        if (!rules[i].weight) continue;
        double w = *rules[i].weight;
        if (!(w >= 0.0 && w <= 1.0))
            throw PlanError("soft rule weight " + format_double(w) + " is outside [0, 1]", rules[i].span);
        soft_.push_back(i);
    }
}

double SoftProgram::weight(size_t i) const { return *plan_.program().rules[soft_[i]].weight; }

double SoftProgram::probability(const std::vector<bool>& included) const {
    double p = 1.0;
    for (size_t i = 0; i < soft_.size(); ++i) p *= included[i] ? weight(i) : 1.0 - weight(i);
    return p;
}

RunResult SoftProgram::run_world(const std::vector<bool>& included, const std::set<std::string>& roots) const {
    EngineOptions opt = options_;
    opt.disabled_rules.assign(plan_.program().rules.size(), false);
    for (size_t i = 0; i < soft_.size(); ++i) opt.disabled_rules[soft_[i]] = !included[i];
    opt.extra_roots.insert(roots.begin(), roots.end());
    return run(plan_, inputs_, opt);
}

bool matches(const Atom& pattern, const Tuple& tuple) {
    if (pattern.args.size() != tuple.size()) return false;
    std::map<std::string, Value> bound;
    for (size_t i = 0; i < tuple.size(); ++i) {
        const Term& t = pattern.args[i];
        if (t.is_variable()) {
            if (t.name == "_") continue;
            auto [it, fresh] = bound.emplace(t.name, tuple[i]);
            if (!fresh && !(it->second == tuple[i])) return false;
        } else if (!(t.value == tuple[i])) {
            return false;
        }
    }
    return true;
}

bool SoftProgram::entails(const std::vector<bool>& included, const Atom& query) const {
    RunResult r = run_world(included, {query.predicate});
    for (const auto& t : r.facts(query.predicate))
        if (matches(query, t)) return true;
    return false;
}

std::vector<World> enumerate_worlds(const SoftProgram& program, size_t cap) {
    size_t k = program.soft_count();
    if (k > cap)
        throw CapExceeded(std::to_string(k) + " soft rules exceed the enumeration cap of " + std::to_string(cap) +
                          "; use Monte Carlo sampling");
    std::vector<World> worlds;
    worlds.reserve(size_t{1} << k);
    for (uint64_t mask = 0; mask < (uint64_t{1} << k); ++mask) {
        World w;
        w.included.resize(k);
        for (size_t i = 0; i < k; ++i) w.included[i] = (mask >> i) & 1;
        w.probability = program.probability(w.included);
        worlds.push_back(std::move(w));
    }
    return worlds;
}

namespace {

/// Neumaier summation: 2^20 world probabilities must still add to 1 within 1e-12.
struct Sum {
    double total = 0.0, carry = 0.0;
    void add(double x) {
        double t = total + x;
        carry += std::abs(total) >= std::abs(x) ? (total - t) + x : (x - t) + total;
        total = t;
    }
    double value() const { return total + carry; }
};

}  // namespace

MarginalEstimate enumerate_marginal(const SoftProgram& program, const Atom& query, size_t cap) {
    auto worlds = enumerate_worlds(program, cap);
    Sum mass, hit;
    for (const auto& w : worlds) {
        mass.add(w.probability);
        if (w.probability > 0.0 && program.entails(w.included, query)) hit.add(w.probability);
    }
    if (std::abs(mass.value() - 1.0) > 1e-12)
        throw EvalError("world probabilities sum to " + format_double(mass.value()) + ", not 1");
    MarginalEstimate e;
    e.query = query;
    e.method = MarginalEstimate::Method::Exact;
    e.p = std::min(1.0, std::max(0.0, hit.value()));
    e.worlds_evaluated = worlds.size();
    return e;
}

IndependentSampler::IndependentSampler(std::vector<double> weights, uint64_t seed)
    : weights_(std::move(weights)), rng_(seed) {}

std::vector<bool> IndependentSampler::next() {
    std::vector<bool> world(weights_.size());
    for (size_t i = 0; i < weights_.size(); ++i) world[i] = std::bernoulli_distribution(weights_[i])(rng_);
    return world;
}

MarginalEstimate sample_marginal(const SoftProgram& program, const Atom& query, size_t samples, uint64_t seed) {
    std::vector<double> weights;
    for (size_t i = 0; i < program.soft_count(); ++i) weights.push_back(program.weight(i));
    IndependentSampler sampler(std::move(weights), seed);
    MarginalEstimate e = sample_marginal(program, query, samples, sampler);
    e.seed = seed;
    return e;
}

MarginalEstimate sample_marginal(const SoftProgram& program, const Atom& query, size_t samples,
                                 WorldSampler& sampler) {
    if (samples == 0) throw EvalError("Monte Carlo needs at least one sample");
    std::map<std::vector<bool>, bool> memo;
    size_t hits = 0;
    for (size_t s = 0; s < samples; ++s) {
        auto world = sampler.next();
        auto it = memo.find(world);
        if (it == memo.end()) it = memo.emplace(world, program.entails(world, query)).first;
        hits += it->second;
    }
    MarginalEstimate e;
    e.query = query;
    e.method = MarginalEstimate::Method::MonteCarlo;
    e.samples = samples;
    e.p = static_cast<double>(hits) / static_cast<double>(samples);
    e.half_width = 1.96 * std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(samples));
    e.worlds_evaluated = memo.size();
    return e;
}

}  // namespace vada
