#include "vada/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "vada/analyzer.hpp"
#include "vada/engine.hpp"
#include "vada/error.hpp"
#include "vada/explain.hpp"
#include "vada/fact.hpp"
#include "vada/io.hpp"
#include "vada/parser.hpp"
#include "vada/soft.hpp"

namespace vada::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

class FileMissing : public Error {
    using Error::Error;
};

Program load_program(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileMissing("cannot open program file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_program(text.str());
}

std::string located(const fs::path& file, const Error& e) {
    std::string where = file.string();
    if (e.span().known()) where += ":" + std::to_string(e.span().line) + ":" + std::to_string(e.span().column);
    return where + ": " + e.message();
}

/// Maps an exception to its exit code after printing it.
int report(const fs::path& file, std::ostream& err) {
    try {
        throw;
    } catch (const FileMissing& e) {
        err << "error: " << e.message() << '\n';
        return Failure;
    } catch (const CycleError& e) {
        err << "error: " << located(file, e) << '\n';
        return Rejected;
    } catch (const ParseError& e) {
        err << "error: " << located(file, e) << '\n';
        return Rejected;
    } catch (const ArityError& e) {
        err << "error: " << located(file, e) << '\n';
        return Rejected;
    } catch (const PlanError& e) {
        err << "error: " << located(file, e) << '\n';
        return Rejected;
    } catch (const NotDerived& e) {
        err << e.message() << '\n';
        return Rejected;
    } catch (const Error& e) {
        err << "error: " << located(file, e) << '\n';
        return Failure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return Failure;
    }
}

ordered_json value_json(const Value& v) {
    switch (v.type()) {
        case Value::Type::Boolean: return v.as_bool();
        case Value::Type::Integer: return v.as_int();
        case Value::Type::Double: return v.as_double();
        case Value::Type::String: return v.as_string();
        default: return v.to_literal();
    }
}

std::string fact_text(const std::string& pred, const Tuple& t) { return Fact{pred, t}.to_string(); }

/// Prints lints to stderr; true when any is an error.
bool print_lints(const std::vector<Lint>& lints, std::ostream& err) {
    for (const auto& l : lints) err << format_lint(l) << '\n';
    return has_errors(lints);
}

BindingOptions binding_options(const RunConfig& c) {
    BindingOptions o;
    o.base_dir = c.program.has_parent_path() ? c.program.parent_path() : fs::path(".");
    o.overrides = c.facts;
    o.out_dir = c.out_dir;
    return o;
}

EngineOptions engine_options(const RunConfig& c) {
    EngineOptions o;
    o.null_depth = c.null_depth;
    o.cache_limit = c.cache_limit;
    o.provenance = c.provenance;
    return o;
}

Atom ground_query(const std::string& text) {
    std::string t = text;
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    if (!t.empty() && t.back() == '.') t.pop_back();
    return parse_atom(t);
}

}  // namespace

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        Program program = load_program(config.program);
        if (print_lints(lint(program), err)) return Rejected;
        Plan p = plan(program);
        Bindings b = resolve_bindings(program, binding_options(config));
        Inputs inputs = load_inputs(program, b);
        RunResult result = run(p, inputs, engine_options(config));
        auto outputs = finalize_outputs(result, b);

        std::map<std::string, const BindingSpec*> bound;
        for (const auto& s : b.outputs) bound[s.predicate] = &s;
        ordered_json doc;
        for (const auto& [pred, facts] : outputs) {
            auto it = bound.find(pred);
            if (it != bound.end()) {
                size_t n = write_output(facts, *it->second);
                err << "wrote " << n << " rows of " << pred << " to " << it->second->path.string() << '\n';
            }
            if (config.json) {
                auto& rows = doc["outputs"][pred] = ordered_json::array();
                for (const auto& t : facts) {
                    ordered_json row = ordered_json::array();
                    for (const auto& v : t) row.push_back(value_json(v));
                    rows.push_back(std::move(row));
                }
            } else if (it == bound.end()) {
                for (const auto& t : facts) out << fact_text(pred, t) << '\n';
            }
        }
        if (config.json) {
            doc["stats"] = result.stats.to_map();
            out << doc.dump(2) << '\n';
        } else {
            for (const auto& [k, v] : result.stats.to_map()) err << "stat " << k << '=' << v << '\n';
        }
        return Ok;
    } catch (...) {
        return report(config.program, err);
    }
}

int cmd_lint(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        Program program = load_program(config.program);
        auto lints = lint(program);
        if (config.json) {
            ordered_json arr = ordered_json::array();
            for (const auto& l : lints)
                arr.push_back({{"code", l.code},
                               {"severity", l.severity == Severity::Error ? "error" : "warning"},
                               {"line", l.span.line},
                               {"column", l.span.column},
                               {"message", l.message}});
            out << arr.dump(2) << '\n';
        } else {
            for (const auto& l : lints) out << format_lint(l) << '\n';
        }
        return has_errors(lints) ? Rejected : Ok;
    } catch (...) {
        return report(config.program, err);
    }
}

int cmd_explain(const RunConfig& config, const std::string& fact, std::ostream& out, std::ostream& err) {
    try {
        Program program = load_program(config.program);
        Fact target = fact_from_atom(ground_query(fact));
        if (print_lints(lint(program), err)) return Rejected;
        Plan p = plan(program);
        Bindings b = resolve_bindings(program, binding_options(config));
        EngineOptions opt = engine_options(config);
        opt.provenance = true;
        RunResult result = run(p, load_inputs(program, b), opt);
        Explanation e;
        try {
            e = explain(*result.provenance, program, target);
        } catch (const NotDerived&) {
            if (config.json) out << ordered_json{{"fact", target.to_string()}, {"derived", false}}.dump(2) << '\n';
            else out << "not derived: " << target.to_string() << '\n';
            return Rejected;
        }
        out << (config.json ? to_json(e) : render(e));
        if (config.json) out << '\n';
        return Ok;
    } catch (...) {
        return report(config.program, err);
    }
}

int cmd_prob(const RunConfig& config, const ProbConfig& prob, std::ostream& out, std::ostream& err) {
    try {
        Program program = load_program(config.program);
        Atom query = ground_query(prob.query);
        if (print_lints(lint(program), err)) return Rejected;
        Bindings b = resolve_bindings(program, binding_options(config));
        Inputs inputs = load_inputs(program, b);
        EngineOptions opt = engine_options(config);
        opt.provenance = false;
        SoftProgram soft(program, std::move(inputs), opt);
        MarginalEstimate e;
        if (prob.method == "exact") e = enumerate_marginal(soft, query, prob.cap);
        else if (prob.method == "mc") e = sample_marginal(soft, query, prob.samples, config.seed);
        else {
            err << "error: unknown method '" << prob.method << "'; use exact or mc\n";
            return Failure;
        }
        if (config.json) {
            ordered_json doc = {{"query", prob.query},
                                {"p", e.p},
                                {"method", prob.method},
                                {"ci", e.half_width},
                                {"soft_rules", soft.soft_count()}};
            if (e.method == MarginalEstimate::Method::MonteCarlo) {
                doc["samples"] = e.samples;
                doc["seed"] = e.seed;
            }
            out << doc.dump(2) << '\n';
        } else {
            out << e.to_string() << '\n';
        }
        return Ok;
    } catch (...) {
        return report(config.program, err);
    }
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Warded Datalog+/- reasoner", "vada"};
    app.require_subcommand(1);
    RunConfig config;
    ProbConfig prob;
    std::vector<std::string> facts;
    std::string out_dir, fact;

    auto common = [&](CLI::App* sub) {
        sub->add_option("program", config.program, "program file")->required();
        sub->add_option("--facts", facts, "bind an input predicate to a CSV file (pred=path)");
        sub->add_option("--null-depth", config.null_depth, "maximum labelled-null nesting depth")
            ->check(CLI::PositiveNumber);
        sub->add_option("--cache-limit", config.cache_limit, "maximum resident cached facts (0 = unlimited)");
        sub->add_flag("--provenance", config.provenance, "record derivations");
        sub->add_flag("--json", config.json, "machine-readable output");
    };
    auto* run_cmd = app.add_subcommand("run", "evaluate a program and write its outputs");
    common(run_cmd);
    run_cmd->add_option("--out", out_dir, "directory for output files");
    auto* lint_cmd = app.add_subcommand("lint", "static checks");
    lint_cmd->add_option("program", config.program, "program file")->required();
    lint_cmd->add_flag("--json", config.json, "machine-readable output");
    auto* explain_cmd = app.add_subcommand("explain", "print how a fact was derived");
    common(explain_cmd);
    explain_cmd->add_option("fact", fact, "ground fact, e.g. 'controls(\"A\",\"C\")'")->required();
    auto* prob_cmd = app.add_subcommand("prob", "marginal probability of a query under soft rules");
    common(prob_cmd);
    prob_cmd->add_option("--query", prob.query, "fact pattern")->required();
    prob_cmd->add_option("--method", prob.method, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
    prob_cmd->add_option("--samples", prob.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
    prob_cmd->add_option("--seed", config.seed, "Monte Carlo seed");
    prob_cmd->add_option("--cap", prob.cap, "largest soft-rule count for exact enumeration");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? Ok : Failure;
    }

    for (const auto& f : facts) {
        auto eq = f.find('=');
        if (eq == std::string::npos || eq == 0) {
            err << "error: --facts expects pred=path, got '" << f << "'\n";
            return Failure;
        }
        config.facts[f.substr(0, eq)] = f.substr(eq + 1);
    }
    if (!out_dir.empty()) config.out_dir = fs::path(out_dir);

    if (*run_cmd) return cmd_run(config, out, err);
    if (*lint_cmd) return cmd_lint(config, out, err);
    if (*explain_cmd) return cmd_explain(config, fact, out, err);
    return cmd_prob(config, prob, out, err);
}

}  // namespace vada::cli
