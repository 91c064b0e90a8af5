#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vada/ast.hpp"
#include "vada/engine.hpp"
#include "vada/value.hpp"

namespace vada {

struct ColumnMapping {
    size_t position = 0;  // 0-based argument index
    std::string column;
    Value::Type type = Value::Type::String;
};

struct BindingSpec {
    enum class Direction { Input, Output };
    enum class Target { Csv, Inline };

    std::string predicate;
    Direction direction = Direction::Input;
    Target target = Target::Csv;
    std::filesystem::path path;
    char delimiter = ',';
    bool header = false;
    std::vector<ColumnMapping> mapping;  // sorted by position
    size_t arity = 0;                    // 0 when the program does not fix it
};

struct PostDirective {
    enum class Op { Min, Max, Avg, Sum, Count };

    std::string predicate;
    Op op = Op::Min;
    size_t position = 1;  // 1-based

    /// Parses "min(2)"; throws PlanError on anything else.
    static PostDirective parse(const std::string& predicate, const std::string& text, SourceSpan span = {});
};

/// Type names accepted in @mapping: string, integer/int, double/float,
/// boolean/bool, date, set.
std::optional<Value::Type> type_from_name(std::string_view name);

// CSV ----------------------------------------------------------------------

struct CsvCell {
    std::string text;
    bool quoted = false;
};
using CsvRow = std::vector<CsvCell>;

/// RFC 4180 reader: quoted cells may hold delimiters, doubled quotes and newlines.
std::vector<CsvRow> read_csv(std::istream& in, char delimiter = ',');
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells, char delimiter = ',',
                   const std::vector<bool>& force_quote = {});

/// Reads labelled-null tokens `_:n<k>`; equal tokens within one load share a
/// fresh null, distinct from anything the engine mints.
class NullFactory {
public:
    Value get(uint64_t token);

private:
    std::map<uint64_t, uint64_t> seen_;
    static uint64_t next_;
};

/// Infers the type of an untyped cell: integer, double, #T/#F, null token,
/// ISO date, [a;b] set, else string. Quoted cells are always strings.
Value infer_cell(const CsvCell& cell, NullFactory& nulls);
/// Coerces a cell to a declared type; throws SchemaError at `row`.
Value coerce_cell(const CsvCell& cell, Value::Type type, NullFactory& nulls, size_t row);
/// Text form in a CSV file, plus whether it must be quoted to read back as a string.
std::pair<std::string, bool> format_cell(const Value& v);

// Bindings -----------------------------------------------------------------

/// Loads one fact per row in file order. `arity` of 0 accepts any row width.
std::vector<Tuple> load_input(const BindingSpec& spec, size_t arity);

/// Groups by every position except `position` and folds the group with `op`.
std::vector<Tuple> apply_post(const std::vector<Tuple>& facts, const PostDirective& directive);

/// Writes the tuples sorted; returns the number of data rows.
size_t write_output(const std::vector<Tuple>& facts, const BindingSpec& spec);

struct Bindings {
    std::vector<BindingSpec> inputs;
    std::vector<BindingSpec> outputs;
    std::vector<PostDirective> posts;
};

struct BindingOptions {
    std::filesystem::path base_dir = ".";
    /// --facts pred=path
    std::map<std::string, std::filesystem::path> overrides;
    /// --out dir: output files go here under their bound file name.
    std::optional<std::filesystem::path> out_dir;
};

/// Resolves @input/@output/@bind/@mapping/@post. Throws PlanError for an
/// @input without data, a bad mapping or a bad @post.
Bindings resolve_bindings(const Program& program, const BindingOptions& options = {});

Inputs load_inputs(const Program& program, const Bindings& bindings);

/// Output predicate name to its final facts after @post directives.
std::map<std::string, std::vector<Tuple>> finalize_outputs(const RunResult& result, const Bindings& bindings);

}  // namespace vada
