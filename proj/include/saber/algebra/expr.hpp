#pragma once

#include "saber/relmodel/relation.hpp"
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace saber {

/// A possibly-qualified attribute reference.
struct ColumnName {
   std::string qualifier;
   std::string name;

   std::string to_string() const { return qualifier.empty() ? name : qualifier + "." + name; }
   std::size_t resolve(const Schema& schema) const { return schema.resolve(qualifier, name); }
   friend bool operator==(const ColumnName&, const ColumnName&) = default;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Scalar expression of the conventional operators (WHERE, ON, SELECT, ORDER BY).
struct Expr {
   enum class Kind {
      Column,
      Literal,
      Compare, // op: = <> < <= > >=
      And,
      Or,
      Not,
      Arith, // op: + - * /
      Neg,
      Cast,
      IsNull,
      IsNotNull,
      /// Placeholder for a semantic UDF call inside an expression; only the
      /// SQL front-end creates these and the planner removes them.
      SemRef,
   };

   Kind kind = Kind::Literal;
   ColumnName column;
   /// Positional binding; when set it wins over the name.
   std::optional<std::size_t> column_index;
   Value literal;
   std::string op;
   ValueKind cast_to = ValueKind::Text;
   std::size_t sem_call = 0;
   std::vector<ExprPtr> args;

   static ExprPtr make_column(std::string qualifier, std::string name);
   static ExprPtr make_column_at(std::size_t index, ColumnName display);
   static ExprPtr make_literal(Value v);
   static ExprPtr make_compare(std::string op, ExprPtr l, ExprPtr r);
   static ExprPtr make_and(ExprPtr l, ExprPtr r);
   static ExprPtr make_or(ExprPtr l, ExprPtr r);
   static ExprPtr make_not(ExprPtr e);
   static ExprPtr make_arith(std::string op, ExprPtr l, ExprPtr r);
   static ExprPtr make_neg(ExprPtr e);
   static ExprPtr make_cast(ExprPtr e, ValueKind to);
   static ExprPtr make_is_null(ExprPtr e, bool negated);
   static ExprPtr make_sem_ref(std::size_t call);
};

bool exprs_equal(const ExprPtr& a, const ExprPtr& b);

/// SQL text for the expression (parseable by the front-end).
std::string to_sql(const Expr& e);

/// Every column reference in e, in left-to-right order.
std::vector<ColumnName> referenced_columns(const Expr& e);
bool contains_sem_ref(const Expr& e);

/// Result kind of e against schema; throws BindingError on unresolvable
/// columns or ill-typed operators.
ValueKind infer_kind(const Expr& e, const Schema& schema);

/// Expression with column references resolved once against a schema.
class BoundExpr {
   public:
   BoundExpr(ExprPtr expr, const Schema& schema);
   Value evaluate(const Tuple& row) const;
   /// Evaluates a predicate: true only for a non-null true result.
   bool test(const Tuple& row) const;
   ValueKind kind() const { return kind_; }

   private:
   struct Node {
      const Expr* expr;
      std::size_t index = 0;
      std::vector<Node> children;
   };
   static Node bind(const Expr& e, const Schema& schema);
   static Value eval(const Node& n, const Tuple& row);

   ExprPtr expr_;
   Node root_;
   ValueKind kind_;
};

/// Splits nested ANDs into a flat conjunct list.
std::vector<ExprPtr> split_conjuncts(const ExprPtr& e);

} // namespace saber
