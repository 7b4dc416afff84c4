#pragma once

#include "saber/relmodel/value.hpp"
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace saber {

struct Column {
   std::string name;
   ValueKind kind = ValueKind::Text;
   /// Table alias the column is reachable through; empty for derived columns.
   std::string qualifier;

   /// "alias.name", or just "name" when unqualified.
   std::string qualified_name() const;
   friend bool operator==(const Column&, const Column&) = default;
};

/// Ordered list of columns. Lookups are case-insensitive.
class Schema {
   public:
   Schema() = default;
   explicit Schema(std::vector<Column> columns);

   std::size_t arity() const { return columns_.size(); }
   const std::vector<Column>& columns() const { return columns_; }
   const Column& operator[](std::size_t i) const { return columns_[i]; }

   /// Index of the column matching (qualifier, name). An empty qualifier
   /// matches any. Throws BindingError on unknown or ambiguous names.
   std::size_t resolve(std::string_view qualifier, std::string_view name) const;
   std::optional<std::size_t> try_resolve(std::string_view qualifier, std::string_view name) const;

   /// Same columns with every qualifier replaced.
   Schema requalified(const std::string& qualifier) const;
   /// Concatenation; throws BindingError if a fully-qualified name repeats.
   static Schema concat(const Schema& left, const Schema& right);
   /// Appends one column; throws BindingError on a duplicate qualified name.
   Schema with_column(Column column) const;

   friend bool operator==(const Schema&, const Schema&) = default;

   private:
   void check_unique() const;
   std::vector<Column> columns_;
};

/// Positional compatibility for the set operators: equal arity and pairwise
/// coercible kinds. Column names are ignored.
bool check_union_compatible(const Schema& a, const Schema& b);

using Tuple = std::vector<Value>;

/// Values of left followed by values of right.
Tuple tuple_concat(const Tuple& left, const Tuple& right);

bool tuples_identical(const Tuple& a, const Tuple& b);
std::size_t tuple_hash(const Tuple& t);

struct TupleHash {
   std::size_t operator()(const Tuple& t) const { return tuple_hash(t); }
};
struct TupleIdentical {
   bool operator()(const Tuple& a, const Tuple& b) const { return tuples_identical(a, b); }
};

/// Schema plus an ordered list of rows. Duplicates are kept and order is
/// significant.
class Relation {
   public:
   Relation() = default;
   explicit Relation(Schema schema) : schema_(std::move(schema)) {}
   /// Validates arity and kinds of every row (Int is accepted in Float columns).
   Relation(Schema schema, std::vector<Tuple> rows);

   const Schema& schema() const { return schema_; }
   const std::vector<Tuple>& rows() const { return rows_; }
   std::size_t size() const { return rows_.size(); }
   bool empty() const { return rows_.empty(); }

   /// Row-by-row identity in order, plus equal column kinds and arity.
   bool same_rows(const Relation& other) const;
   /// Multiset identity of the rows, ignoring order.
   bool same_multiset(const Relation& other) const;

   private:
   Schema schema_;
   std::vector<Tuple> rows_;
};

/// "alias.column: value" lines in schema order, the context format handed to
/// semantic backends.
std::string render_row(const Schema& schema, const Tuple& row);
/// Render only the listed column indexes, still in schema order.
std::string render_row(const Schema& schema, const Tuple& row, const std::vector<std::size_t>& columns);
/// Values only, joined with ", "; the text compared by semantic equivalence.
std::string canonical_text(const Tuple& row);

} // namespace saber
