#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace saber {

enum class ValueKind { Null, Bool, Int, Float, Text };

const char* to_string(ValueKind kind);
/// Parses "null", "bool", "int", "float", "text" (case-insensitive).
std::optional<ValueKind> parse_value_kind(std::string_view name);

/// True for the kind pairs a union-compatible column may combine: identical
/// kinds, or Int with Float.
bool kinds_coercible(ValueKind a, ValueKind b);

/// A single attribute value.
class Value {
   public:
   Value() = default;
   explicit Value(bool b) : data_(b) {}
   explicit Value(std::int64_t i) : data_(i) {}
   explicit Value(int i) : data_(static_cast<std::int64_t>(i)) {}
   explicit Value(double f) : data_(f) {}
   explicit Value(std::string s) : data_(std::move(s)) {}
   explicit Value(const char* s) : data_(std::string(s)) {}

   static Value null() { return Value(); }

   ValueKind kind() const { return static_cast<ValueKind>(data_.index()); }
   bool is_null() const { return kind() == ValueKind::Null; }
   bool is_numeric() const { return kind() == ValueKind::Int || kind() == ValueKind::Float; }

   bool as_bool() const;
   std::int64_t as_int() const;
   /// Int values are widened.
   double as_float() const;
   const std::string& as_text() const;

   /// Display text: decimal integers, shortest round-trip floats, "true"/"false", "NULL".
   std::string to_string() const;

   /// Structural identity used by duplicate elimination, grouping and the
   /// conventional set operators: Null matches Null, Int 1 matches Float 1.0.
   bool identical(const Value& other) const;
   std::size_t hash() const;

   private:
   std::variant<std::monostate, bool, std::int64_t, double, std::string> data_;
};

/// SQL comparison. Numeric kinds compare after Int->Float coercion; any Null
/// operand yields unordered. Other cross-kind comparisons throw BindingError.
std::partial_ordering compare(const Value& a, const Value& b);

/// SQL equality: false whenever either side is Null.
bool sql_equals(const Value& a, const Value& b);

/// Total order used by ORDER BY: Null sorts first, otherwise as compare().
std::weak_ordering sort_order(const Value& a, const Value& b);

/// Converts v to the requested kind (CAST semantics). Throws BindingError
/// when the text does not parse.
Value cast_value(const Value& v, ValueKind target);

/// Parses text as a value of the requested kind; nullopt when it does not fit.
std::optional<Value> parse_as(std::string_view text, ValueKind kind);

} // namespace saber
