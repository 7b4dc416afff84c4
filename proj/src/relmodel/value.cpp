#include "saber/relmodel/value.hpp"
#include "saber/error.hpp"
#include "saber/util/strings.hpp"
#include <charconv>
#include <cmath>
#include <functional>

namespace saber {

const char* to_string(ValueKind kind) {
   switch (kind) {
      case ValueKind::Null: return "null";
      case ValueKind::Bool: return "bool";
      case ValueKind::Int: return "int";
      case ValueKind::Float: return "float";
      case ValueKind::Text: return "text";
   }
   return "?";
}

std::optional<ValueKind> parse_value_kind(std::string_view name) {
   auto lower = util::to_lower(name);
   if (lower == "null") return ValueKind::Null;
   if (lower == "bool" || lower == "boolean") return ValueKind::Bool;
   if (lower == "int" || lower == "integer" || lower == "bigint") return ValueKind::Int;
   if (lower == "float" || lower == "double" || lower == "real") return ValueKind::Float;
   if (lower == "text" || lower == "string" || lower == "varchar") return ValueKind::Text;
   return std::nullopt;
}

bool kinds_coercible(ValueKind a, ValueKind b) {
   if (a == b) return true;
   auto numeric = [](ValueKind k) { return k == ValueKind::Int || k == ValueKind::Float; };
   return numeric(a) && numeric(b);
}

bool Value::as_bool() const {
   if (kind() != ValueKind::Bool) throw BindingError(std::string("expected bool, got ") + saber::to_string(kind()));
   return std::get<bool>(data_);
}

std::int64_t Value::as_int() const {
   if (kind() != ValueKind::Int) throw BindingError(std::string("expected int, got ") + saber::to_string(kind()));
   return std::get<std::int64_t>(data_);
}

double Value::as_float() const {
   if (kind() == ValueKind::Int) return static_cast<double>(std::get<std::int64_t>(data_));
   if (kind() != ValueKind::Float) throw BindingError(std::string("expected number, got ") + saber::to_string(kind()));
   return std::get<double>(data_);
}

const std::string& Value::as_text() const {
   if (kind() != ValueKind::Text) throw BindingError(std::string("expected text, got ") + saber::to_string(kind()));
   return std::get<std::string>(data_);
}

static std::string format_double(double d) {
   if (std::isnan(d)) return "NaN";
   if (std::isinf(d)) return d > 0 ? "Infinity" : "-Infinity";
   char buf[64];
   auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), d);
   std::string out(buf, end);
   // keep floats recognisable as floats when re-ingested
   if (out.find_first_of(".eE") == std::string::npos) out += ".0";
   return out;
}

std::string Value::to_string() const {
   switch (kind()) {
      case ValueKind::Null: return "NULL";
      case ValueKind::Bool: return std::get<bool>(data_) ? "true" : "false";
      case ValueKind::Int: return std::to_string(std::get<std::int64_t>(data_));
      case ValueKind::Float: return format_double(std::get<double>(data_));
      case ValueKind::Text: return std::get<std::string>(data_);
   }
   return {};
}

bool Value::identical(const Value& other) const {
   if (is_numeric() && other.is_numeric()) {
      if (kind() == ValueKind::Int && other.kind() == ValueKind::Int) return as_int() == other.as_int();
      return as_float() == other.as_float();
   }
   return data_ == other.data_;
}

std::size_t Value::hash() const {
   switch (kind()) {
      case ValueKind::Null: return 0x9e3779b97f4a7c15ULL;
      case ValueKind::Bool: return std::hash<bool>{}(std::get<bool>(data_)) + 1;
      case ValueKind::Int:
      case ValueKind::Float: {
         double d = as_float();
         if (d == 0.0) d = 0.0; // fold -0.0
         return std::hash<double>{}(d);
      }
      case ValueKind::Text: return std::hash<std::string>{}(std::get<std::string>(data_));
   }
   return 0;
}

std::partial_ordering compare(const Value& a, const Value& b) {
   if (a.is_null() || b.is_null()) return std::partial_ordering::unordered;
   if (a.is_numeric() && b.is_numeric()) {
      if (a.kind() == ValueKind::Int && b.kind() == ValueKind::Int) return a.as_int() <=> b.as_int();
      return a.as_float() <=> b.as_float();
   }
   if (a.kind() != b.kind())
      throw BindingError(std::string("cannot compare ") + to_string(a.kind()) + " with " + to_string(b.kind()));
   if (a.kind() == ValueKind::Bool) return a.as_bool() <=> b.as_bool();
   auto c = a.as_text().compare(b.as_text());
   return c < 0 ? std::partial_ordering::less : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
}

bool sql_equals(const Value& a, const Value& b) {
   return compare(a, b) == std::partial_ordering::equivalent;
}

std::weak_ordering sort_order(const Value& a, const Value& b) {
   if (a.is_null() || b.is_null()) {
      if (a.is_null() && b.is_null()) return std::weak_ordering::equivalent;
      return a.is_null() ? std::weak_ordering::less : std::weak_ordering::greater;
   }
   auto c = compare(a, b);
   if (c == std::partial_ordering::less) return std::weak_ordering::less;
   if (c == std::partial_ordering::greater) return std::weak_ordering::greater;
   return std::weak_ordering::equivalent;
}

std::optional<Value> parse_as(std::string_view text, ValueKind kind) {
   switch (kind) {
      case ValueKind::Null: return Value::null();
      case ValueKind::Text: return Value(std::string(text));
      case ValueKind::Bool: {
         auto lower = util::to_lower(util::trim(text));
         if (lower == "true" || lower == "t" || lower == "1") return Value(true);
         if (lower == "false" || lower == "f" || lower == "0") return Value(false);
         return std::nullopt;
      }
      case ValueKind::Int: {
         auto t = util::trim(text);
         if (t.empty()) return std::nullopt;
         std::int64_t v = 0;
         const char* begin = t.data();
         if (*begin == '+') ++begin;
         auto [end, ec] = std::from_chars(begin, t.data() + t.size(), v);
         if (ec != std::errc() || end != t.data() + t.size()) return std::nullopt;
         return Value(v);
      }
      case ValueKind::Float: {
         auto t = util::trim(text);
         if (t.empty()) return std::nullopt;
         double v = 0;
         const char* begin = t.data();
         if (*begin == '+') ++begin;
         auto [end, ec] = std::from_chars(begin, t.data() + t.size(), v);
         if (ec != std::errc() || end != t.data() + t.size()) return std::nullopt;
         return Value(v);
      }
   }
   return std::nullopt;
}

Value cast_value(const Value& v, ValueKind target) {
   if (v.is_null() || v.kind() == target) return v;
   switch (target) {
      case ValueKind::Null: return Value::null();
      case ValueKind::Text: return Value(v.to_string());
      case ValueKind::Float:
         if (v.is_numeric()) return Value(v.as_float());
         if (v.kind() == ValueKind::Bool) return Value(v.as_bool() ? 1.0 : 0.0);
         break;
      case ValueKind::Int:
         if (v.kind() == ValueKind::Float) return Value(static_cast<std::int64_t>(std::trunc(v.as_float())));
         if (v.kind() == ValueKind::Bool) return Value(static_cast<std::int64_t>(v.as_bool()));
         break;
      case ValueKind::Bool:
         if (v.is_numeric()) return Value(v.as_float() != 0.0);
         break;
   }
   if (v.kind() == ValueKind::Text) {
      if (auto parsed = parse_as(v.as_text(), target)) return *parsed;
   }
   throw BindingError("cannot cast '" + v.to_string() + "' to " + to_string(target));
}

} // namespace saber
