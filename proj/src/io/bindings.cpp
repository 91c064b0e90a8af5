#include <algorithm>
#include <fstream>
#include <sstream>

#include "vada/error.hpp"
#include "vada/expr.hpp"
#include "vada/io.hpp"

namespace vada {

namespace fs = std::filesystem;

std::optional<Value::Type> type_from_name(std::string_view name) {
    std::string n(name);
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
    if (n == "string" || n == "str") return Value::Type::String;
    if (n == "integer" || n == "int" || n == "long") return Value::Type::Integer;
    if (n == "double" || n == "float" || n == "real") return Value::Type::Double;
    if (n == "boolean" || n == "bool") return Value::Type::Boolean;
    if (n == "date") return Value::Type::Date;
    if (n == "set") return Value::Type::Set;
    return std::nullopt;
}

PostDirective PostDirective::parse(const std::string& predicate, const std::string& text, SourceSpan span) {
    auto open = text.find('('), close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open || close + 1 != text.size())
        throw PlanError("malformed @post directive '" + text + "' for " + predicate + "; expected op(position)", span);
    std::string op = text.substr(0, open);
    PostDirective d;
    d.predicate = predicate;
    if (op == "min") d.op = Op::Min;
    else if (op == "max") d.op = Op::Max;
    else if (op == "avg") d.op = Op::Avg;
    else if (op == "sum") d.op = Op::Sum;
    else if (op == "count") d.op = Op::Count;
    else throw PlanError("unknown @post operation '" + op + "'", span);
    std::string pos = text.substr(open + 1, close - open - 1);
    try {
        size_t used = 0;
        long v = std::stol(pos, &used);
        if (used != pos.size() || v < 1) throw std::invalid_argument(pos);
        d.position = static_cast<size_t>(v);
    } catch (const std::logic_error&) {
        throw PlanError("bad @post position '" + pos + "' for " + predicate, span);
    }
    return d;
}

// Loading ---------------------------------------------------------------

std::vector<Tuple> load_input(const BindingSpec& spec, size_t arity) {
    std::ifstream in(spec.path, std::ios::binary);
    if (!in) throw IoError("cannot open input file '" + spec.path.string() + "' for " + spec.predicate);
    auto rows = read_csv(in, spec.delimiter);

    std::vector<std::string> header;
    size_t first = 0;
    if (spec.header && !rows.empty()) {
        for (const auto& c : rows[0]) header.push_back(c.text);
        first = 1;
    }
    if (arity == 0 || arity == SIZE_MAX) arity = spec.mapping.empty() ? 0 : spec.mapping.size();

    // column index and declared type per argument position
    std::vector<size_t> column;
    std::vector<std::optional<Value::Type>> types;
    for (const auto& m : spec.mapping) {
        size_t col = m.position;
        auto it = std::find(header.begin(), header.end(), m.column);
        if (it != header.end()) col = static_cast<size_t>(it - header.begin());
        column.push_back(col);
        types.push_back(m.type);
    }
    size_t width = !header.empty() ? header.size() : (spec.mapping.empty() ? arity : 0);

    NullFactory nulls;
    std::vector<Tuple> out;
    for (size_t r = first; r < rows.size(); ++r) {
        const CsvRow& row = rows[r];
        size_t number = r - first + 1;
        if (width == 0 && spec.mapping.empty()) width = row.size();
        size_t needed = width;
        if (needed == 0) needed = column.empty() ? 0 : *std::max_element(column.begin(), column.end()) + 1;
        bool bad = width ? row.size() != width : row.size() < needed;
        if (bad)
            throw SchemaError("row " + std::to_string(number) + " of " + spec.path.filename().string() + ": expected " +
                                  std::to_string(needed) + " columns for " + spec.predicate + ", found " +
                                  std::to_string(row.size()),
                              number);
        Tuple t;
        if (spec.mapping.empty()) {
            for (const auto& cell : row) t.push_back(infer_cell(cell, nulls));
        } else {
            for (size_t i = 0; i < column.size(); ++i) {
                if (column[i] >= row.size())
                    throw SchemaError("row " + std::to_string(number) + ": missing column " + spec.mapping[i].column,
                                      number);
                t.push_back(coerce_cell(row[column[i]], *types[i], nulls, number));
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

// @post -----------------------------------------------------------------

namespace {

Value fold(const std::vector<Value>& values, PostDirective::Op op) {
    using Op = PostDirective::Op;
    if (op == Op::Count) return Value::integer(static_cast<int64_t>(values.size()));
    for (const auto& v : values)
        if (v.is_null()) throw EvalError("@post over a labelled null");
    if (op == Op::Min || op == Op::Max) {
        Value best = values[0];
        for (size_t i = 1; i < values.size(); ++i) {
            int c = arith::compare(values[i], best);
            if (op == Op::Min ? c < 0 : c > 0) best = values[i];
        }
        return best;
    }
    for (const auto& v : values)
        if (!v.is_numeric()) throw EvalError("@post " + std::string(op == Op::Sum ? "sum" : "avg") +
                                             " over non-numeric value " + v.to_literal());
    Value total = values[0];
    for (size_t i = 1; i < values.size(); ++i) total = arith::add(total, values[i]);
    if (op == Op::Sum) return total;
    return Value::real(total.to_number() / static_cast<double>(values.size()));
}

}  // namespace

std::vector<Tuple> apply_post(const std::vector<Tuple>& facts, const PostDirective& directive) {
    size_t pos = directive.position - 1;
    std::map<Tuple, std::vector<Value>> groups;
    for (const auto& t : facts) {
        if (pos >= t.size())
            throw EvalError("@post position " + std::to_string(directive.position) + " exceeds arity " +
                            std::to_string(t.size()) + " of " + directive.predicate);
        Tuple key = t;
        key.erase(key.begin() + static_cast<std::ptrdiff_t>(pos));
        groups[std::move(key)].push_back(t[pos]);
    }
    std::vector<Tuple> out;
    out.reserve(groups.size());
    for (auto& [key, values] : groups) {
        Tuple t = key;
        t.insert(t.begin() + static_cast<std::ptrdiff_t>(pos), fold(values, directive.op));
        out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Writing ---------------------------------------------------------------

size_t write_output(const std::vector<Tuple>& facts, const BindingSpec& spec) {
    std::vector<Tuple> rows = facts;
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());

    if (spec.path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(spec.path.parent_path(), ec);
    }
    std::ofstream out(spec.path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write output file '" + spec.path.string() + "' for " + spec.predicate);

    if (spec.header) {
        size_t arity = spec.arity ? spec.arity : (rows.empty() ? spec.mapping.size() : rows[0].size());
        std::vector<std::string> names;
        for (size_t i = 0; i < arity; ++i) names.push_back("arg" + std::to_string(i + 1));
        for (const auto& m : spec.mapping)
            if (m.position < names.size()) names[m.position] = m.column;
        write_csv_row(out, names, spec.delimiter);
    }
    for (const auto& t : rows) {
        std::vector<std::string> cells;
        std::vector<bool> quote;
        for (const auto& v : t) {
            auto [text, q] = format_cell(v);
            cells.push_back(std::move(text));
            quote.push_back(q);
        }
        write_csv_row(out, cells, spec.delimiter, quote);
    }
    if (!out) throw IoError("failed writing '" + spec.path.string() + "'");
    return rows.size();
}

// Resolution ------------------------------------------------------------

namespace {

char parse_delimiter(const std::string& v, SourceSpan span) {
    if (v == "tab" || v == "\\t" || v == "\t") return '\t';
    if (v == "comma") return ',';
    if (v == "semicolon") return ';';
    if (v == "pipe") return '|';
    if (v.size() == 1) return v[0];
    throw PlanError("bad csv delimiter '" + v + "'", span);
}

bool parse_flag(const std::string& v, SourceSpan span) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw PlanError("bad csv flag value '" + v + "'", span);
}

struct BindInfo {
    fs::path path;
    char delimiter = ',';
    std::optional<bool> header;
};

BindInfo parse_bind(const Annotation& a, const fs::path& base) {
    BindInfo info;
    std::istringstream opts(a.args[1].as_string());
    std::string word;
    opts >> word;  // "csv", checked by the planner
    while (opts >> word) {
        auto eq = word.find('=');
        if (eq == std::string::npos) throw PlanError("bad csv option '" + word + "'", a.span);
        std::string key = word.substr(0, eq), value = word.substr(eq + 1);
        if (key == "delimiter" || key == "sep") info.delimiter = parse_delimiter(value, a.span);
        else if (key == "header") info.header = parse_flag(value, a.span);
        else throw PlanError("unknown csv option '" + key + "'", a.span);
    }
    fs::path p;
    for (size_t i = 2; i < a.args.size(); ++i) p /= a.args[i].to_plain();
    if (p.empty()) throw PlanError("@bind for " + a.target() + " names no file", a.span);
    info.path = p.is_absolute() ? p : base / p;
    return info;
}

}  // namespace

Bindings resolve_bindings(const Program& program, const BindingOptions& options) {
    Bindings out;
    auto arities = program.arities();
    auto arity_of = [&](const std::string& pred) {
        auto it = arities.find(pred);
        return it == arities.end() ? size_t{0} : it->second;
    };

    std::map<std::string, std::vector<ColumnMapping>> mappings;
    for (const auto* a : program.annotations_of(Annotation::Kind::Mapping)) {
        if (a->args.size() < 4 || a->args[1].type() != Value::Type::Integer)
            throw PlanError("@mapping expects (predicate, position, column, type)", a->span);
        int64_t pos = a->args[1].as_int();
        auto type = type_from_name(a->args[3].to_plain());
        if (!type) throw PlanError("unknown type '" + a->args[3].to_plain() + "' in @mapping", a->span);
        if (pos < 1) throw PlanError("@mapping position must be at least 1", a->span);
        mappings[a->target()].push_back({static_cast<size_t>(pos - 1), a->args[2].to_plain(), *type});
    }
    for (auto& [pred, ms] : mappings) {
        std::sort(ms.begin(), ms.end(), [](const auto& x, const auto& y) { return x.position < y.position; });
        size_t n = arity_of(pred) ? arity_of(pred) : ms.size();
        bool ok = ms.size() == n;
        for (size_t i = 0; ok && i < ms.size(); ++i) ok = ms[i].position == i;
        if (!ok)
            throw PlanError("@mapping for " + pred + " must cover positions 1.." + std::to_string(n) + " exactly once");
    }

    std::map<std::string, const Annotation*> binds;
    for (const auto* a : program.annotations_of(Annotation::Kind::Bind)) binds[a->target()] = a;

    std::set<std::string> produced, has_facts;
    for (const auto& r : program.rules) produced.insert(r.head.predicate);
    for (const auto& f : program.facts) has_facts.insert(f.predicate);

    auto make = [&](const std::string& pred, BindingSpec::Direction dir) {
        BindingSpec s;
        s.predicate = pred;
        s.direction = dir;
        s.header = dir == BindingSpec::Direction::Output;
        s.arity = arity_of(pred);
        if (auto it = mappings.find(pred); it != mappings.end()) s.mapping = it->second;
        if (auto it = binds.find(pred); it != binds.end()) {
            BindInfo info = parse_bind(*it->second, options.base_dir);
            s.path = info.path;
            s.delimiter = info.delimiter;
            if (info.header) s.header = *info.header;
        }
        return s;
    };

    auto inputs = program.input_predicates();
    for (const auto& [pred, a] : binds)
        if (!inputs.count(pred) && !program.output_predicates().count(pred) && !produced.count(pred))
            inputs.insert(pred);
    for (const auto& [pred, path] : options.overrides) inputs.insert(pred);

    for (const auto& pred : inputs) {
        BindingSpec s = make(pred, BindingSpec::Direction::Input);
        if (auto it = options.overrides.find(pred); it != options.overrides.end()) {
            s.path = it->second;
        } else if (s.path.empty()) {
            if (has_facts.count(pred)) continue;  // inline facts only
            const Annotation* decl = nullptr;
            for (const auto* a : program.annotations_of(Annotation::Kind::Input))
                if (a->target() == pred) decl = a;
            throw PlanError("input predicate " + pred + " has no binding; pass --facts " + pred + "=<file>",
                            decl ? decl->span : SourceSpan{});
        }
        out.inputs.push_back(std::move(s));
    }

    for (const auto& pred : program.output_predicates()) {
        BindingSpec s = make(pred, BindingSpec::Direction::Output);
        if (options.out_dir) s.path = *options.out_dir / (s.path.empty() ? fs::path(pred + ".csv") : s.path.filename());
        if (s.path.empty()) continue;  // printed by the caller
        out.outputs.push_back(std::move(s));
    }

    for (const auto* a : program.annotations_of(Annotation::Kind::Post)) {
        if (a->args.size() < 2) throw PlanError("@post expects (predicate, \"op(position)\")", a->span);
        PostDirective d = PostDirective::parse(a->target(), a->args[1].to_plain(), a->span);
        size_t n = arity_of(d.predicate);
        if (n && d.position > n)
            throw PlanError("@post position " + std::to_string(d.position) + " exceeds arity " + std::to_string(n) +
                                " of " + d.predicate,
                            a->span);
        out.posts.push_back(d);
    }
    return out;
}

Inputs load_inputs(const Program& program, const Bindings& bindings) {
    auto arities = program.arities();
    Inputs inputs;
    for (const auto& spec : bindings.inputs) {
        auto it = arities.find(spec.predicate);
        auto rows = load_input(spec, it == arities.end() ? 0 : it->second);
        auto& dest = inputs[spec.predicate];
        dest.insert(dest.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    }
    return inputs;
}

std::map<std::string, std::vector<Tuple>> finalize_outputs(const RunResult& result, const Bindings& bindings) {
    std::map<std::string, std::vector<Tuple>> out;
    for (const auto& pred : result.outputs) {
        std::vector<Tuple> facts = result.facts(pred);
        for (const auto& d : bindings.posts)
            if (d.predicate == pred) facts = apply_post(facts, d);
        out[pred] = std::move(facts);
    }
    return out;
}

}  // namespace vada
