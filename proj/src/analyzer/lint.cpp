#include <algorithm>
#include <tuple>

#include "vada/analyzer.hpp"

namespace vada {

namespace {

Lint make(std::string code, Severity sev, std::string msg, SourceSpan span) {
    return Lint{std::move(code), sev, std::move(msg), span};
}

SourceSpan span_of(const Expr& e, const SourceSpan& fallback) { return e.span.known() ? e.span : fallback; }

void unbound_variables(const Program& p, std::vector<Lint>& out) {
    for (size_t r = 0; r < p.rules.size(); ++r) {
        const Rule& rule = p.rules[r];
        std::set<std::string> bound = rule.body_variables();
        std::set<std::string> all_assigned;
        for (const auto& a : rule.assignments) all_assigned.insert(a.variable);
        std::set<std::string> reported;
        auto report = [&](const std::string& v, const std::string& where, SourceSpan span) {
            if (!reported.insert(v).second) return;
            out.push_back(make("L1", Severity::Error,
                               "variable " + v + " in " + where + " of rule " + std::to_string(r + 1) +
                                   " is not bound by any positive body atom",
                               span));
        };
        for (const auto& a : rule.assignments) {
            for (const auto& v : a.value_expr()->variables())
                if (!bound.count(v)) report(v, a.is_aggregate() ? "aggregate" : "assignment", span_of(*a.value_expr(), a.span));
            bound.insert(a.variable);
        }
        for (const auto& c : rule.conditions)
            for (const auto& v : c->variables())
                if (!bound.count(v)) report(v, "condition", span_of(*c, rule.span));
        for (const auto& n : rule.negated)
            for (const auto& v : n.variables())
                if (!bound.count(v)) report(v, "negated atom " + n.predicate, n.span);
    }
}

}  // namespace

std::vector<Lint> lint(const Program& p) {
    std::vector<Lint> out;
    unbound_variables(p, out);

    std::set<std::string> produced, consumed;
    std::map<std::string, SourceSpan> first_consumer, first_producer;
    for (const auto& f : p.facts) {
        produced.insert(f.predicate);
        first_producer.emplace(f.predicate, f.span);
    }
    for (const auto* a : p.annotations_of(Annotation::Kind::Input)) {
        produced.insert(a->target());
        first_producer.emplace(a->target(), a->span);
    }
    for (const auto& rule : p.rules) {
        produced.insert(rule.head.predicate);
        first_producer.emplace(rule.head.predicate, rule.head.span);
        for (const auto* list : {&rule.body, &rule.negated})
            for (const auto& a : *list) {
                consumed.insert(a.predicate);
                first_consumer.emplace(a.predicate, a.span);
            }
    }
    std::set<std::string> outputs = p.output_predicates();

    for (const auto& pred : consumed)
        if (!produced.count(pred))
            out.push_back(make("L2", Severity::Error,
                               "predicate " + pred + " is used but never produced by a rule, fact or @input",
                               first_consumer[pred]));
    for (const auto* a : p.annotations_of(Annotation::Kind::Output))
        if (!produced.count(a->target()))
            out.push_back(make("L3", Severity::Error, "output predicate " + a->target() + " is never produced",
                               a->span));
    if (!outputs.empty())
        for (const auto& pred : produced)
            if (!consumed.count(pred) && !outputs.count(pred))
                out.push_back(make("L4", Severity::Warning,
                                   "predicate " + pred + " is produced but never used or output",
                                   first_producer[pred]));

    // Least fixpoint of predicates that can ever hold a fact.
    std::set<std::string> producible;
    for (const auto& f : p.facts) producible.insert(f.predicate);
    for (const auto* a : p.annotations_of(Annotation::Kind::Input)) producible.insert(a->target());
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& rule : p.rules) {
            if (producible.count(rule.head.predicate)) continue;
            bool ready = std::all_of(rule.body.begin(), rule.body.end(),
                                      [&](const Atom& a) { return producible.count(a.predicate) > 0; });
            if (ready) changed = producible.insert(rule.head.predicate).second || changed;
        }
    }
    for (size_t r = 0; r < p.rules.size(); ++r)
        for (const auto& a : p.rules[r].body)
            if (!producible.count(a.predicate)) {
                out.push_back(make("L5", Severity::Warning,
                                   "rule " + std::to_string(r + 1) + " can never fire: " + a.predicate +
                                       " can never hold a fact",
                                   p.rules[r].span));
                break;
            }

    std::stable_sort(out.begin(), out.end(), [](const Lint& a, const Lint& b) {
        return std::tie(a.span.line, a.span.column, a.code) < std::tie(b.span.line, b.span.column, b.code);
    });
    return out;
}

bool has_errors(const std::vector<Lint>& lints) {
    return std::any_of(lints.begin(), lints.end(), [](const Lint& l) { return l.severity == Severity::Error; });
}

std::string format_lint(const Lint& l) {
    return std::string(l.severity == Severity::Error ? "ERROR" : "WARNING") + " " + l.code + " " +
           std::to_string(l.span.line) + ":" + std::to_string(l.span.column) + " " + l.message;
}

}  // namespace vada
