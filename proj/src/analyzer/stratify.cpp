#include <algorithm>
#include <deque>
#include <functional>

#include "vada/analyzer.hpp"

namespace vada {

namespace {

struct Edge {
    size_t to;
    bool negative;
};

struct Graph {
    std::vector<std::string> names;
    std::map<std::string, size_t> index;
    std::vector<std::vector<Edge>> out;

    size_t node(const std::string& name) {
        auto [it, fresh] = index.emplace(name, names.size());
        if (fresh) {
            names.push_back(name);
            out.emplace_back();
        }
        return it->second;
    }
};

/// Tarjan; components come out with dependencies (edge targets) first.
std::vector<std::vector<size_t>> components(const Graph& g) {
    size_t n = g.names.size(), counter = 0;
    std::vector<size_t> idx(n, SIZE_MAX), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<size_t> stack;
    std::vector<std::vector<size_t>> result;
    std::function<void(size_t)> visit = [&](size_t v) {
        idx[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (const Edge& e : g.out[v]) {
            if (idx[e.to] == SIZE_MAX) {
                visit(e.to);
                low[v] = std::min(low[v], low[e.to]);
            } else if (on_stack[e.to]) {
                low[v] = std::min(low[v], idx[e.to]);
            }
        }
        if (low[v] == idx[v]) {
            std::vector<size_t> comp;
            size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp.push_back(w);
            } while (w != v);
            result.push_back(std::move(comp));
        }
    };
    for (size_t v = 0; v < n; ++v)
        if (idx[v] == SIZE_MAX) visit(v);
    return result;
}

std::vector<std::string> witness(const Graph& g, const std::vector<size_t>& comp_of, size_t from, size_t to) {
    // Shortest path to -> ... -> from inside the component, prefixed by the negative edge.
    std::vector<size_t> parent(g.names.size(), SIZE_MAX);
    std::deque<size_t> queue{to};
    parent[to] = to;
    while (!queue.empty()) {
        size_t v = queue.front();
        queue.pop_front();
        if (v == from) break;
        for (const Edge& e : g.out[v])
            if (comp_of[e.to] == comp_of[from] && parent[e.to] == SIZE_MAX) {
                parent[e.to] = v;
                queue.push_back(e.to);
            }
    }
    std::vector<std::string> path;
    for (size_t v = from; v != to; v = parent[v]) path.push_back(g.names[v]);
    path.push_back(g.names[to]);
    std::reverse(path.begin(), path.end());
    path.insert(path.begin(), g.names[from]);
    return path;
}

}  // namespace

Stratification stratify(const Program& program) {
    Graph g;
    for (const auto& [name, arity] : program.arities()) g.node(name);
    struct SourceEdge {
        size_t from, to;
        bool negative;
    };
    std::vector<SourceEdge> in_order;
    for (const auto& rule : program.rules) {
        size_t h = g.node(rule.head.predicate);
        for (const auto& a : rule.body) {
            size_t b = g.node(a.predicate);
            g.out[h].push_back({b, false});
            in_order.push_back({h, b, false});
        }
        for (const auto& a : rule.negated) {
            size_t b = g.node(a.predicate);
            g.out[h].push_back({b, true});
            in_order.push_back({h, b, true});
        }
    }

    auto comps = components(g);
    std::vector<size_t> comp_of(g.names.size());
    for (size_t c = 0; c < comps.size(); ++c)
        for (size_t v : comps[c]) comp_of[v] = c;

    for (const auto& e : in_order)
        if (e.negative && comp_of[e.from] == comp_of[e.to]) throw CycleError(witness(g, comp_of, e.from, e.to));

    std::vector<size_t> level(comps.size(), 0);
    for (size_t c = 0; c < comps.size(); ++c)
        for (size_t v : comps[c])
            for (const Edge& e : g.out[v])
                if (comp_of[e.to] != c) level[c] = std::max(level[c], level[comp_of[e.to]] + (e.negative ? 1 : 0));

    Stratification s;
    for (size_t v = 0; v < g.names.size(); ++v) s.stratum_of[g.names[v]] = level[comp_of[v]];
    size_t top = 0;
    for (const auto& [name, lvl] : s.stratum_of) top = std::max(top, lvl);
    s.strata.resize(s.stratum_of.empty() ? 0 : top + 1);
    for (const auto& [name, lvl] : s.stratum_of) s.strata[lvl].push_back(name);
    return s;
}

}  // namespace vada
