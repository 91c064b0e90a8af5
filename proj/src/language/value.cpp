#include "vada/value.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>

namespace vada {

namespace {

size_t mix(size_t seed, size_t h) {
    return seed ^ (h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

std::optional<Date> Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [&](std::string_view s, auto& out) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && p == s.data() + s.size();
    };
    if (!num(iso.substr(0, 4), y) || !num(iso.substr(5, 2), m) || !num(iso.substr(8, 2), d))
        return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    auto days = std::chrono::sys_days(ymd).time_since_epoch().count();
    return Date{static_cast<int32_t>(days)};
}

std::string Date::to_string() const {
    std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Value Value::set(std::vector<Value> elements) {
    std::sort(elements.begin(), elements.end());
    elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
    return Value(Data(std::make_shared<const std::vector<Value>>(std::move(elements))));
}

double Value::to_number() const {
    if (type() == Type::Integer) return static_cast<double>(as_int());
    return as_double();
}

std::string format_double(double d) {
    if (std::isinf(d)) return d > 0 ? "1.0e999" : "-1.0e999";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
    std::string s(buf, p);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string quote_string(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string Value::to_literal() const {
    switch (type()) {
        case Type::Boolean: return as_bool() ? "#T" : "#F";
        case Type::Integer: return std::to_string(as_int());
        case Type::Double: return format_double(as_double());
        case Type::String: return quote_string(as_string());
        case Type::Date: return as_date().to_string();
        case Type::Null: return "_:n" + std::to_string(null_id());
        case Type::Set: {
            std::string out = "[";
            const auto& elems = as_set();
            for (size_t i = 0; i < elems.size(); ++i) {
                if (i) out += ", ";
                out += elems[i].to_literal();
            }
            return out + "]";
        }
    }
    return {};
}

std::string Value::to_plain() const {
    if (type() == Type::String) return as_string();
    return to_literal();
}

bool Value::operator==(const Value& other) const {
    if (data_.index() != other.data_.index()) return false;
    if (type() == Type::Set) return as_set() == other.as_set();
    return data_ == other.data_;
}

std::strong_ordering Value::operator<=>(const Value& other) const {
    if (data_.index() != other.data_.index()) return data_.index() <=> other.data_.index();
    switch (type()) {
        case Type::Boolean: return as_bool() <=> other.as_bool();
        case Type::Integer: return as_int() <=> other.as_int();
        case Type::Double: {
            double a = as_double(), b = other.as_double();
            if (a < b) return std::strong_ordering::less;
            if (a > b) return std::strong_ordering::greater;
            return std::strong_ordering::equal;
        }
        case Type::String: return as_string().compare(other.as_string()) <=> 0;
        case Type::Date: return as_date() <=> other.as_date();
        case Type::Null: return null_id() <=> other.null_id();
        case Type::Set: {
            const auto& a = as_set();
            const auto& b = other.as_set();
            return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
        }
    }
    return std::strong_ordering::equal;
}

size_t Value::hash() const {
    size_t seed = data_.index();
    switch (type()) {
        case Type::Boolean: return mix(seed, as_bool());
        case Type::Integer: return mix(seed, std::hash<int64_t>{}(as_int()));
        case Type::Double: {
            uint64_t bits;
            double d = as_double();
            std::memcpy(&bits, &d, sizeof bits);
            return mix(seed, std::hash<uint64_t>{}(bits));
        }
        case Type::String: return mix(seed, std::hash<std::string>{}(as_string()));
        case Type::Date: return mix(seed, std::hash<int32_t>{}(as_date().days));
        case Type::Null: return mix(seed, std::hash<uint64_t>{}(null_id()));
        case Type::Set:
            for (const auto& e : as_set()) seed = mix(seed, e.hash());
            return seed;
    }
    return seed;
}

std::string_view Value::type_name(Type t) {
    switch (t) {
        case Type::Boolean: return "boolean";
        case Type::Integer: return "integer";
        case Type::Double: return "double";
        case Type::String: return "string";
        case Type::Date: return "date";
        case Type::Set: return "set";
        case Type::Null: return "null";
    }
    return "?";
}

size_t TupleHash::operator()(const Tuple& t) const {
    size_t seed = t.size();
    for (const auto& v : t) seed = mix(seed, v.hash());
    return seed;
}

bool contains_null(const Tuple& t) {
    return std::any_of(t.begin(), t.end(), [](const Value& v) { return v.is_null(); });
}

}  // namespace vada
