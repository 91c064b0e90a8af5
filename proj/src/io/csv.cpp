#include <charconv>
#include <istream>
#include <ostream>

#include "vada/error.hpp"
#include "vada/io.hpp"

namespace vada {

std::vector<CsvRow> read_csv(std::istream& in, char delimiter) {
    std::vector<CsvRow> rows;
    CsvRow row;
    CsvCell cell;
    bool in_quotes = false, row_started = false, after_quote = false;
    char c;
    auto end_cell = [&] {
        row.push_back(std::move(cell));
        cell = {};
        after_quote = false;
    };
    auto end_row = [&] {
        end_cell();
        rows.push_back(std::move(row));
        row = {};
        row_started = false;
    };
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    cell.text += '"';
                } else {
                    in_quotes = false;
                    after_quote = true;
                }
            } else {
                cell.text += c;
            }
            continue;
        }
        if (c == '\r') {
            if (in.peek() == '\n') in.get(c);
            c = '\n';
        }
        if (c == '\n') {
            // blank lines carry no row
            if (row_started) end_row();
            continue;
        }
        row_started = true;
        if (c == delimiter) {
            end_cell();
        } else if (c == '"' && cell.text.empty() && !cell.quoted) {
            in_quotes = true;
            cell.quoted = true;
        } else if (!after_quote) {
            cell.text += c;
        }
    }
    if (in_quotes) throw IoError("unterminated quoted field in CSV");
    if (row_started) end_row();
    return rows;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells, char delimiter,
                   const std::vector<bool>& force_quote) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out << delimiter;
        const std::string& s = cells[i];
        bool quote = (i < force_quote.size() && force_quote[i]) ||
                     s.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos;
        if (!quote) {
            out << s;
            continue;
        }
        out << '"';
        for (char c : s) {
            if (c == '"') out << '"';
            out << c;
        }
        out << '"';
    }
    out << '\n';
}

uint64_t NullFactory::next_ = uint64_t{1} << 62;

Value NullFactory::get(uint64_t token) {
    auto [it, fresh] = seen_.emplace(token, 0);
    if (fresh) it->second = next_++;
    return Value::null(it->second);
}

namespace {

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<uint64_t> null_token(std::string_view s) {
    if (s.size() < 4 || s.substr(0, 3) != "_:n") return std::nullopt;
    return parse_number<uint64_t>(s.substr(3));
}

std::optional<bool> parse_bool(std::string_view s) {
    if (s == "#T" || s == "true") return true;
    if (s == "#F" || s == "false") return false;
    return std::nullopt;
}

bool looks_like_double(std::string_view s) {
    // from_chars accepts "inf"/"nan"; only plain decimal forms count
    return !s.empty() && s.find_first_of("0123456789") != std::string_view::npos &&
           s.find_first_not_of("0123456789+-.eE") == std::string_view::npos;
}

std::optional<Value> parse_set(std::string_view s, NullFactory& nulls) {
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') return std::nullopt;
    std::string_view body = s.substr(1, s.size() - 2);
    std::vector<Value> elems;
    if (!body.empty()) {
        size_t start = 0;
        while (true) {
            size_t semi = body.find(';', start);
            std::string_view part = body.substr(start, semi == std::string_view::npos ? semi : semi - start);
            elems.push_back(infer_cell({std::string(part), false}, nulls));
            if (semi == std::string_view::npos) break;
            start = semi + 1;
        }
    }
    return Value::set(std::move(elems));
}

}  // namespace

Value infer_cell(const CsvCell& cell, NullFactory& nulls) {
    const std::string& s = cell.text;
    if (cell.quoted) return Value::string(s);
    if (auto i = parse_number<int64_t>(s)) return Value::integer(*i);
    if (looks_like_double(s))
        if (auto d = parse_number<double>(s)) return Value::real(*d);
    if (s == "#T") return Value::boolean(true);
    if (s == "#F") return Value::boolean(false);
    if (auto n = null_token(s)) return nulls.get(*n);
    if (auto d = Date::parse(s)) return Value::date(*d);
    if (auto set = parse_set(s, nulls)) return *set;
    return Value::string(s);
}

Value coerce_cell(const CsvCell& cell, Value::Type type, NullFactory& nulls, size_t row) {
    const std::string& s = cell.text;
    if (!cell.quoted)
        if (auto n = null_token(s)) return nulls.get(*n);
    auto fail = [&]() -> Value {
        throw SchemaError("row " + std::to_string(row) + ": cannot read '" + s + "' as " +
                              std::string(Value::type_name(type)),
                          row);
    };
    switch (type) {
        case Value::Type::String: return Value::string(s);
        case Value::Type::Integer:
            if (auto i = parse_number<int64_t>(s)) return Value::integer(*i);
            return fail();
        case Value::Type::Double:
            if (looks_like_double(s))
                if (auto d = parse_number<double>(s)) return Value::real(*d);
            return fail();
        case Value::Type::Boolean:
            if (auto b = parse_bool(s)) return Value::boolean(*b);
            return fail();
        case Value::Type::Date:
            if (auto d = Date::parse(s)) return Value::date(*d);
            return fail();
        case Value::Type::Set:
            if (auto set = parse_set(s, nulls)) return *set;
            return fail();
        case Value::Type::Null: return fail();
    }
    return fail();
}

std::pair<std::string, bool> format_cell(const Value& v) {
    switch (v.type()) {
        case Value::Type::String: {
            // quote anything that would otherwise read back as another type
            NullFactory scratch;
            bool ambiguous = v.as_string().empty() || infer_cell({v.as_string(), false}, scratch).type() !=
                                                          Value::Type::String;
            return {v.as_string(), ambiguous};
        }
        case Value::Type::Set: {
            std::string out = "[";
            bool first = true;
            for (const auto& e : v.as_set()) {
                if (!first) out += ';';
                first = false;
                out += format_cell(e).first;
            }
            return {out + "]", false};
        }
        default: return {v.to_plain(), false};
    }
}

}  // namespace vada
