#include "saber/relmodel/relation.hpp"
#include "saber/error.hpp"
#include "saber/util/strings.hpp"
#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace saber {

std::string Column::qualified_name() const {
   return qualifier.empty() ? name : qualifier + "." + name;
}

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
   check_unique();
}

void Schema::check_unique() const {
   std::unordered_set<std::string> seen;
   for (const auto& c : columns_) {
      if (!seen.insert(util::to_lower(c.qualified_name())).second)
         throw BindingError("duplicate column name '" + c.qualified_name() + "'");
   }
}

std::optional<std::size_t> Schema::try_resolve(std::string_view qualifier, std::string_view name) const {
   std::optional<std::size_t> found;
   for (std::size_t i = 0; i < columns_.size(); ++i) {
      const auto& c = columns_[i];
      if (!util::iequals(c.name, name)) continue;
      if (!qualifier.empty() && !util::iequals(c.qualifier, qualifier)) continue;
      if (found) {
         std::string full = qualifier.empty() ? std::string(name) : std::string(qualifier) + "." + std::string(name);
         throw BindingError("ambiguous column reference '" + full + "'");
      }
      found = i;
   }
   return found;
}

std::size_t Schema::resolve(std::string_view qualifier, std::string_view name) const {
   if (auto idx = try_resolve(qualifier, name)) return *idx;
   std::string full = qualifier.empty() ? std::string(name) : std::string(qualifier) + "." + std::string(name);
   throw BindingError("unknown column '" + full + "'");
}

Schema Schema::requalified(const std::string& qualifier) const {
   auto cols = columns_;
   for (auto& c : cols) c.qualifier = qualifier;
   return Schema(std::move(cols));
}

Schema Schema::concat(const Schema& left, const Schema& right) {
   auto cols = left.columns_;
   cols.insert(cols.end(), right.columns_.begin(), right.columns_.end());
   return Schema(std::move(cols));
}

Schema Schema::with_column(Column column) const {
   auto cols = columns_;
   cols.push_back(std::move(column));
   return Schema(std::move(cols));
}

bool check_union_compatible(const Schema& a, const Schema& b) {
   if (a.arity() != b.arity()) return false;
   for (std::size_t i = 0; i < a.arity(); ++i)
      if (!kinds_coercible(a[i].kind, b[i].kind)) return false;
   return true;
}

Tuple tuple_concat(const Tuple& left, const Tuple& right) {
   Tuple out;
   out.reserve(left.size() + right.size());
   out.insert(out.end(), left.begin(), left.end());
   out.insert(out.end(), right.begin(), right.end());
   return out;
}

bool tuples_identical(const Tuple& a, const Tuple& b) {
   if (a.size() != b.size()) return false;
   for (std::size_t i = 0; i < a.size(); ++i)
      if (!a[i].identical(b[i])) return false;
   return true;
}

std::size_t tuple_hash(const Tuple& t) {
   std::size_t h = 1469598103934665603ULL;
   for (const auto& v : t) h = (h ^ v.hash()) * 1099511628211ULL;
   return h;
}

Relation::Relation(Schema schema, std::vector<Tuple> rows) : schema_(std::move(schema)), rows_(std::move(rows)) {
   for (std::size_t r = 0; r < rows_.size(); ++r) {
      const auto& row = rows_[r];
      if (row.size() != schema_.arity())
         throw BindingError("row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) + " values, schema has " +
                            std::to_string(schema_.arity()));
      for (std::size_t c = 0; c < row.size(); ++c) {
         if (row[c].is_null()) continue;
         auto want = schema_[c].kind;
         if (!kinds_coercible(row[c].kind(), want) || (want == ValueKind::Int && row[c].kind() == ValueKind::Float))
            throw BindingError("row " + std::to_string(r + 1) + ": value '" + row[c].to_string() + "' does not fit column " +
                               schema_[c].qualified_name() + ":" + to_string(want));
      }
   }
}

bool Relation::same_rows(const Relation& other) const {
   if (schema_.arity() != other.schema_.arity() || rows_.size() != other.rows_.size()) return false;
   for (std::size_t i = 0; i < rows_.size(); ++i)
      if (!tuples_identical(rows_[i], other.rows_[i])) return false;
   return true;
}

bool Relation::same_multiset(const Relation& other) const {
   if (schema_.arity() != other.schema_.arity() || rows_.size() != other.rows_.size()) return false;
   std::unordered_map<Tuple, long, TupleHash, TupleIdentical> counts;
   for (const auto& r : rows_) ++counts[r];
   for (const auto& r : other.rows_) {
      auto it = counts.find(r);
      if (it == counts.end() || it->second == 0) return false;
      --it->second;
   }
   return true;
}

std::string render_row(const Schema& schema, const Tuple& row) {
   std::string out;
   for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += '\n';
      out += schema[i].qualified_name() + ": " + row[i].to_string();
   }
   return out;
}

std::string render_row(const Schema& schema, const Tuple& row, const std::vector<std::size_t>& columns) {
   auto sorted = columns;
   std::sort(sorted.begin(), sorted.end());
   sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
   std::string out;
   for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i) out += '\n';
      out += schema[sorted[i]].qualified_name() + ": " + row[sorted[i]].to_string();
   }
   return out;
}

std::string canonical_text(const Tuple& row) {
   std::string out;
   for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ", ";
      out += row[i].to_string();
   }
   return out;
}

} // namespace saber
