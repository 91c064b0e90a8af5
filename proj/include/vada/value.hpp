#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vada {

/// Days since 1970-01-01.
struct Date {
    int32_t days = 0;

    static std::optional<Date> parse(std::string_view iso);  // YYYY-MM-DD
    std::string to_string() const;
    auto operator<=>(const Date&) const = default;
};

/// Engine-minted witness for an existentially quantified head variable.
/// Also used for "marked null" values read back from files.
struct LabelledNull {
    uint64_t id = 0;
    auto operator<=>(const LabelledNull&) const = default;
};

class Value;
using Tuple = std::vector<Value>;

/// A typed ground value. Integers and doubles are distinct types; sets are
/// kept sorted and duplicate-free so equality is order-insensitive.
class Value {
public:
    // Declaration order is the cross-type sort order.
    enum class Type : uint8_t { Boolean, Integer, Double, String, Date, Set, Null };

    Value() : data_(false) {}

    static Value boolean(bool b) { return Value(Data(b)); }
    static Value integer(int64_t i) { return Value(Data(i)); }
    static Value real(double d) { return Value(Data(d == 0.0 ? 0.0 : d)); }
    static Value string(std::string s) { return Value(Data(std::move(s))); }
    static Value date(Date d) { return Value(Data(d)); }
    static Value set(std::vector<Value> elements);
    static Value null(uint64_t id) { return Value(Data(LabelledNull{id})); }

    Type type() const { return static_cast<Type>(data_.index()); }
    bool is_null() const { return type() == Type::Null; }
    bool is_numeric() const { return type() == Type::Integer || type() == Type::Double; }

    bool as_bool() const { return std::get<bool>(data_); }
    int64_t as_int() const { return std::get<int64_t>(data_); }
    double as_double() const { return std::get<double>(data_); }
    /// Integer or double widened to double.
    double to_number() const;
    const std::string& as_string() const { return std::get<std::string>(data_); }
    Date as_date() const { return std::get<Date>(data_); }
    const std::vector<Value>& as_set() const { return *std::get<SetPtr>(data_); }
    uint64_t null_id() const { return std::get<LabelledNull>(data_).id; }

    /// Literal form: strings quoted, doubles always carry a '.' or exponent,
    /// booleans as #T/#F, nulls as _:n<k>.
    std::string to_literal() const;
    /// Unquoted form used in CSV cells and messages.
    std::string to_plain() const;

    bool operator==(const Value& other) const;
    std::strong_ordering operator<=>(const Value& other) const;
    size_t hash() const;

    static std::string_view type_name(Type t);

private:
    using SetPtr = std::shared_ptr<const std::vector<Value>>;
    using Data = std::variant<bool, int64_t, double, std::string, Date, SetPtr, LabelledNull>;
    explicit Value(Data d) : data_(std::move(d)) {}
    Data data_;
};

std::string format_double(double d);
std::string quote_string(std::string_view s);

struct ValueHash {
    size_t operator()(const Value& v) const { return v.hash(); }
};

struct TupleHash {
    size_t operator()(const Tuple& t) const;
};

bool contains_null(const Tuple& t);

}  // namespace vada

template <>
struct std::hash<vada::Value> {
    size_t operator()(const vada::Value& v) const { return v.hash(); }
};
