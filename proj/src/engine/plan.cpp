#include <algorithm>
#include <sstream>

#include "compiled.hpp"
#include "vada/engine.hpp"

namespace vada {

std::string_view to_string(PipelineNode::Kind kind) {
    switch (kind) {
        case PipelineNode::Kind::Scan: return "scan";
        case PipelineNode::Kind::Join: return "join";
        case PipelineNode::Kind::Filter: return "filter";
        case PipelineNode::Kind::Project: return "project";
        case PipelineNode::Kind::Aggregate: return "aggregate";
        case PipelineNode::Kind::NegationCheck: return "negation-check";
        case PipelineNode::Kind::ExistentialProject: return "existential-project";
        case PipelineNode::Kind::Union: return "union";
    }
    return "?";
}

namespace {

/// reach[p] = predicates reachable from p through rule bodies (head -> body).
std::map<std::string, std::set<std::string>> reachability(const Program& program) {
    std::map<std::string, std::set<std::string>> direct;
    for (const auto& r : program.rules) {
        auto& out = direct[r.head.predicate];
        for (const auto& a : r.body) out.insert(a.predicate);
        for (const auto& a : r.negated) out.insert(a.predicate);
    }
    std::map<std::string, std::set<std::string>> reach;
    for (const auto& [p, _] : direct) {
        std::set<std::string>& seen = reach[p];
        std::vector<std::string> stack(direct[p].begin(), direct[p].end());
        while (!stack.empty()) {
            std::string q = stack.back();
            stack.pop_back();
            if (!seen.insert(q).second) continue;
            auto it = direct.find(q);
            if (it != direct.end()) stack.insert(stack.end(), it->second.begin(), it->second.end());
        }
    }
    return reach;
}

void check_annotations(const Program& program, EvalContext& ctx) {
    for (const auto& a : program.annotations) {
        switch (a.kind) {
            case Annotation::Kind::QBind:
                throw PlanError("unsupported target: @qbind query bindings are not available", a.span);
            case Annotation::Kind::Bind: {
                std::string type = a.args[1].as_string();
                std::string kind = type.substr(0, type.find(' '));
                if (kind != "csv")
                    throw PlanError("unsupported target '" + kind + "' for " + a.target() + "; only csv is available",
                                    a.span);
                break;
            }
            case Annotation::Kind::Library: {
                std::string prefix = a.args[0].as_string();
                if (!prefix.empty() && prefix.back() == ':') prefix.pop_back();
                std::string lib = a.args[1].as_string();
                if (!ctx.functions->has_library(lib)) throw PlanError("unknown library '" + lib + "'", a.span);
                ctx.aliases[prefix] = lib;
                break;
            }
            default: break;
        }
    }
}

}  // namespace

Plan plan(const Program& program) {
    Plan p;
    p.program_ = program;
    const Program& prog = p.program_;

    auto lints = lint(prog);
    for (const auto& l : lints)
        if (l.severity == Severity::Error) throw PlanError(l.code + ": " + l.message, l.span);

    p.wardedness_ = check_wardedness(prog);
    for (const auto& rw : p.wardedness_.rules)
        if (!rw.ok)
            throw PlanError("program is not warded: rule " + std::to_string(rw.rule + 1) + ": " + rw.description,
                            prog.rules[rw.rule].span);

    p.strata_ = stratify(prog);
    check_annotations(prog, p.ctx_);

    auto reach = reachability(prog);
    auto recursive = [&](const std::string& a, const std::string& b) {
        // a and b share a cycle (a == b means a is self-recursive)
        auto ia = reach.find(a), ib = reach.find(b);
        return ia != reach.end() && ib != reach.end() && ia->second.count(b) && ib->second.count(a);
    };

    std::set<std::string> all;
    for (const auto& [name, arity] : prog.arities()) all.insert(name);
    for (const auto* a : prog.annotations_of(Annotation::Kind::Input)) all.insert(a->target());
    p.roots_ = prog.output_predicates();
    if (p.roots_.empty()) p.roots_ = all;

    p.retained_ = p.roots_;
    for (const auto& r : prog.rules) {
        if (r.body.size() > 1)
            for (const auto& a : r.body) p.retained_.insert(a.predicate);
        for (const auto& a : r.negated) p.retained_.insert(a.predicate);
        if (!r.existential_vars.empty()) p.retained_.insert(r.head.predicate);
        for (const auto& a : r.body)
            if (recursive(a.predicate, a.predicate)) p.retained_.insert(a.predicate);
        if (recursive(r.head.predicate, r.head.predicate)) p.retained_.insert(r.head.predicate);
    }

    // Descriptive pipeline graph.
    std::map<std::string, size_t> scan, uni;
    auto add = [&](PipelineNode n) {
        p.nodes_.push_back(std::move(n));
        return p.nodes_.size() - 1;
    };
    auto stratum = [&](const std::string& pred) {
        auto it = p.strata_.stratum_of.find(pred);
        return it == p.strata_.stratum_of.end() ? size_t{0} : it->second;
    };
    auto link = [&](size_t from, size_t to, bool feedback) {
        p.nodes_[to].children.push_back(from);
        p.edges_.push_back({from, to, feedback});
    };
    for (const auto& pred : all) scan[pred] = add({PipelineNode::Kind::Scan, pred, stratum(pred), {}});
    std::set<std::string> heads;
    for (const auto& r : prog.rules) heads.insert(r.head.predicate);
    for (const auto& pred : heads) {
        uni[pred] = add({PipelineNode::Kind::Union, pred, stratum(pred), {}});
        link(uni[pred], scan[pred], false);
    }
    for (size_t i = 0; i < prog.rules.size(); ++i) {
        const Rule& r = prog.rules[i];
        std::string label = "rule_" + std::to_string(i + 1);
        size_t s = stratum(r.head.predicate);
        auto fb = [&](const std::string& body_pred) { return recursive(r.head.predicate, body_pred); };
        std::optional<size_t> cur;
        if (r.body.size() == 1) {
            cur = scan[r.body[0].predicate];
        } else if (r.body.size() > 1) {
            size_t j = add({PipelineNode::Kind::Join, label, s, {}});
            for (const auto& a : r.body) link(scan[a.predicate], j, fb(a.predicate));
            cur = j;
        }
        auto chain = [&](PipelineNode::Kind kind) {
            size_t n = add({kind, label, s, {}});
            if (cur) link(*cur, n, r.body.size() == 1 && *cur == scan[r.body[0].predicate] && fb(r.body[0].predicate));
            cur = n;
        };
        if (!r.conditions.empty() || r.assignments.size() > (r.aggregate() ? 1u : 0u)) chain(PipelineNode::Kind::Filter);
        if (!r.negated.empty()) {
            chain(PipelineNode::Kind::NegationCheck);
            for (const auto& a : r.negated) link(scan[a.predicate], *cur, false);
        }
        if (r.aggregate()) chain(PipelineNode::Kind::Aggregate);
        chain(r.existential_vars.empty() ? PipelineNode::Kind::Project : PipelineNode::Kind::ExistentialProject);
        link(*cur, uni[r.head.predicate], false);
    }

    p.compiled_ = detail::compile_program(p.program_);
    return p;
}

std::vector<PipelineEdge> Plan::feedback_edges() const {
    std::vector<PipelineEdge> out;
    for (const auto& e : edges_)
        if (e.feedback) out.push_back(e);
    return out;
}

std::string Plan::describe() const {
    std::ostringstream out;
    for (size_t s = 0; s < strata_.strata.size(); ++s) {
        out << "stratum " << s << ":";
        for (const auto& pred : strata_.strata[s]) out << ' ' << pred;
        out << '\n';
    }
    for (size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        out << '#' << i << ' ' << to_string(n.kind) << ' ' << n.label << " [stratum " << n.stratum << "]";
        if (!n.children.empty()) {
            out << " <-";
            for (size_t c : n.children) out << " #" << c;
        }
        out << '\n';
    }
    for (const auto& e : edges_)
        if (e.feedback) out << "feedback #" << e.from << " -> #" << e.to << '\n';
    return out.str();
}

}  // namespace vada
