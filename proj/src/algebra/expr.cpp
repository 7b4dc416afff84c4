#include "saber/algebra/expr.hpp"
#include "saber/error.hpp"
#include "saber/util/strings.hpp"
#include <cctype>
#include <cmath>

namespace saber {

namespace {

std::shared_ptr<Expr> node(Expr::Kind kind) {
   auto e = std::make_shared<Expr>();
   e->kind = kind;
   return e;
}

bool is_identifier_safe(const std::string& s) {
   if (s.empty()) return false;
   if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
   for (unsigned char c : s)
      if (!(std::isalnum(c) || c == '_')) return false;
   return true;
}

std::string quote_ident(const std::string& s) {
   return is_identifier_safe(s) ? s : "\"" + s + "\"";
}

} // namespace

ExprPtr Expr::make_column(std::string qualifier, std::string name) {
   auto e = node(Kind::Column);
   e->column = {std::move(qualifier), std::move(name)};
   return e;
}

ExprPtr Expr::make_column_at(std::size_t index, ColumnName display) {
   auto e = node(Kind::Column);
   e->column = std::move(display);
   e->column_index = index;
   return e;
}

ExprPtr Expr::make_literal(Value v) {
   auto e = node(Kind::Literal);
   e->literal = std::move(v);
   return e;
}

ExprPtr Expr::make_compare(std::string op, ExprPtr l, ExprPtr r) {
   auto e = node(Kind::Compare);
   e->op = op == "!=" ? "<>" : std::move(op);
   e->args = {std::move(l), std::move(r)};
   return e;
}

ExprPtr Expr::make_and(ExprPtr l, ExprPtr r) {
   auto e = node(Kind::And);
   e->args = {std::move(l), std::move(r)};
   return e;
}

ExprPtr Expr::make_or(ExprPtr l, ExprPtr r) {
   auto e = node(Kind::Or);
   e->args = {std::move(l), std::move(r)};
   return e;
}

ExprPtr Expr::make_not(ExprPtr x) {
   auto e = node(Kind::Not);
   e->args = {std::move(x)};
   return e;
}

ExprPtr Expr::make_arith(std::string op, ExprPtr l, ExprPtr r) {
   auto e = node(Kind::Arith);
   e->op = std::move(op);
   e->args = {std::move(l), std::move(r)};
   return e;
}

ExprPtr Expr::make_neg(ExprPtr x) {
   auto e = node(Kind::Neg);
   e->args = {std::move(x)};
   return e;
}

ExprPtr Expr::make_cast(ExprPtr x, ValueKind to) {
   auto e = node(Kind::Cast);
   e->cast_to = to;
   e->args = {std::move(x)};
   return e;
}

ExprPtr Expr::make_is_null(ExprPtr x, bool negated) {
   auto e = node(negated ? Kind::IsNotNull : Kind::IsNull);
   e->args = {std::move(x)};
   return e;
}

ExprPtr Expr::make_sem_ref(std::size_t call) {
   auto e = node(Kind::SemRef);
   e->sem_call = call;
   return e;
}

bool exprs_equal(const ExprPtr& a, const ExprPtr& b) {
   if (a == b) return true;
   if (!a || !b) return false;
   if (a->kind != b->kind || a->op != b->op || a->args.size() != b->args.size()) return false;
   switch (a->kind) {
      case Expr::Kind::Column:
         if (!util::iequals(a->column.qualifier, b->column.qualifier) || !util::iequals(a->column.name, b->column.name) ||
             a->column_index != b->column_index)
            return false;
         break;
      case Expr::Kind::Literal:
         if (a->literal.kind() != b->literal.kind() || !a->literal.identical(b->literal)) return false;
         break;
      case Expr::Kind::Cast:
         if (a->cast_to != b->cast_to) return false;
         break;
      case Expr::Kind::SemRef:
         if (a->sem_call != b->sem_call) return false;
         break;
      default: break;
   }
   for (std::size_t i = 0; i < a->args.size(); ++i)
      if (!exprs_equal(a->args[i], b->args[i])) return false;
   return true;
}

static std::string literal_sql(const Value& v) {
   switch (v.kind()) {
      case ValueKind::Null: return "NULL";
      case ValueKind::Bool: return v.as_bool() ? "TRUE" : "FALSE";
      case ValueKind::Text: return util::sql_quote(v.as_text());
      default: return v.to_string();
   }
}

static const char* kind_sql(ValueKind k) {
   switch (k) {
      case ValueKind::Bool: return "BOOLEAN";
      case ValueKind::Int: return "INTEGER";
      case ValueKind::Float: return "FLOAT";
      case ValueKind::Text: return "TEXT";
      case ValueKind::Null: return "NULL";
   }
   return "TEXT";
}

std::string to_sql(const Expr& e) {
   auto sub = [](const ExprPtr& x) {
      // parenthesise compound operands so precedence survives re-parsing
      switch (x->kind) {
         case Expr::Kind::Column:
         case Expr::Kind::Literal:
         case Expr::Kind::Cast:
         case Expr::Kind::SemRef: return to_sql(*x);
         default: return "(" + to_sql(*x) + ")";
      }
   };
   switch (e.kind) {
      case Expr::Kind::Column:
         return e.column.qualifier.empty() ? quote_ident(e.column.name)
                                           : quote_ident(e.column.qualifier) + "." + quote_ident(e.column.name);
      case Expr::Kind::Literal: return literal_sql(e.literal);
      case Expr::Kind::Compare:
      case Expr::Kind::Arith: return sub(e.args[0]) + " " + e.op + " " + sub(e.args[1]);
      case Expr::Kind::And: return sub(e.args[0]) + " AND " + sub(e.args[1]);
      case Expr::Kind::Or: return sub(e.args[0]) + " OR " + sub(e.args[1]);
      case Expr::Kind::Not: return "NOT " + sub(e.args[0]);
      case Expr::Kind::Neg: return "-" + sub(e.args[0]);
      case Expr::Kind::Cast: return "CAST(" + to_sql(*e.args[0]) + " AS " + kind_sql(e.cast_to) + ")";
      case Expr::Kind::IsNull: return sub(e.args[0]) + " IS NULL";
      case Expr::Kind::IsNotNull: return sub(e.args[0]) + " IS NOT NULL";
      case Expr::Kind::SemRef: return "<semantic call #" + std::to_string(e.sem_call) + ">";
   }
   return {};
}

static void collect_columns(const Expr& e, std::vector<ColumnName>& out) {
   if (e.kind == Expr::Kind::Column) out.push_back(e.column);
   for (const auto& a : e.args) collect_columns(*a, out);
}

std::vector<ColumnName> referenced_columns(const Expr& e) {
   std::vector<ColumnName> out;
   collect_columns(e, out);
   return out;
}

bool contains_sem_ref(const Expr& e) {
   if (e.kind == Expr::Kind::SemRef) return true;
   for (const auto& a : e.args)
      if (contains_sem_ref(*a)) return true;
   return false;
}

static void check_comparable(ValueKind a, ValueKind b, const std::string& what) {
   if (a == ValueKind::Null || b == ValueKind::Null) return;
   if (!kinds_coercible(a, b))
      throw BindingError("cannot compare " + std::string(to_string(a)) + " with " + to_string(b) + " in " + what);
}

ValueKind infer_kind(const Expr& e, const Schema& schema) {
   switch (e.kind) {
      case Expr::Kind::Column: {
         auto idx = e.column_index ? *e.column_index : schema.resolve(e.column.qualifier, e.column.name);
         if (idx >= schema.arity()) throw BindingError("column position out of range for " + e.column.to_string());
         return schema[idx].kind;
      }
      case Expr::Kind::Literal: return e.literal.kind();
      case Expr::Kind::Compare:
         check_comparable(infer_kind(*e.args[0], schema), infer_kind(*e.args[1], schema), to_sql(e));
         return ValueKind::Bool;
      case Expr::Kind::And:
      case Expr::Kind::Or:
      case Expr::Kind::Not:
         for (const auto& a : e.args) {
            auto k = infer_kind(*a, schema);
            if (k != ValueKind::Bool && k != ValueKind::Null) throw BindingError("boolean operand expected in " + to_sql(e));
         }
         return ValueKind::Bool;
      case Expr::Kind::IsNull:
      case Expr::Kind::IsNotNull: infer_kind(*e.args[0], schema); return ValueKind::Bool;
      case Expr::Kind::Arith: {
         auto l = infer_kind(*e.args[0], schema);
         auto r = infer_kind(*e.args[1], schema);
         auto numeric = [](ValueKind k) { return k == ValueKind::Int || k == ValueKind::Float || k == ValueKind::Null; };
         if (!numeric(l) || !numeric(r)) throw BindingError("numeric operands expected in " + to_sql(e));
         if (e.op == "/") return ValueKind::Float;
         if (l == ValueKind::Int && r == ValueKind::Int) return ValueKind::Int;
         return ValueKind::Float;
      }
      case Expr::Kind::Neg: {
         auto k = infer_kind(*e.args[0], schema);
         if (k != ValueKind::Int && k != ValueKind::Float && k != ValueKind::Null) throw BindingError("numeric operand expected in " + to_sql(e));
         return k;
      }
      case Expr::Kind::Cast: infer_kind(*e.args[0], schema); return e.cast_to;
      case Expr::Kind::SemRef: throw BindingError("semantic call is not allowed in this position");
   }
   return ValueKind::Null;
}

BoundExpr::BoundExpr(ExprPtr expr, const Schema& schema) : expr_(std::move(expr)), root_(bind(*expr_, schema)), kind_(infer_kind(*expr_, schema)) {}

BoundExpr::Node BoundExpr::bind(const Expr& e, const Schema& schema) {
   Node n{&e, 0, {}};
   if (e.kind == Expr::Kind::Column) n.index = e.column_index ? *e.column_index : schema.resolve(e.column.qualifier, e.column.name);
   if (e.kind == Expr::Kind::SemRef) throw BindingError("semantic call is not allowed in this position");
   for (const auto& a : e.args) n.children.push_back(bind(*a, schema));
   return n;
}

static Value truth(std::optional<bool> b) {
   return b ? Value(*b) : Value::null();
}

static std::optional<bool> as_truth(const Value& v) {
   if (v.is_null()) return std::nullopt;
   return v.as_bool();
}

Value BoundExpr::eval(const Node& n, const Tuple& row) {
   const Expr& e = *n.expr;
   switch (e.kind) {
      case Expr::Kind::Column: return row.at(n.index);
      case Expr::Kind::Literal: return e.literal;
      case Expr::Kind::Compare: {
         auto c = compare(eval(n.children[0], row), eval(n.children[1], row));
         if (c == std::partial_ordering::unordered) return Value::null();
         if (e.op == "=") return Value(c == 0);
         if (e.op == "<>") return Value(c != 0);
         if (e.op == "<") return Value(c < 0);
         if (e.op == "<=") return Value(c <= 0);
         if (e.op == ">") return Value(c > 0);
         if (e.op == ">=") return Value(c >= 0);
         throw BindingError("unknown comparison " + e.op);
      }
      case Expr::Kind::And: {
         auto l = as_truth(eval(n.children[0], row));
         if (l && !*l) return Value(false);
         auto r = as_truth(eval(n.children[1], row));
         if (r && !*r) return Value(false);
         if (l && r) return Value(true);
         return Value::null();
      }
      case Expr::Kind::Or: {
         auto l = as_truth(eval(n.children[0], row));
         if (l && *l) return Value(true);
         auto r = as_truth(eval(n.children[1], row));
         if (r && *r) return Value(true);
         if (l && r) return Value(false);
         return Value::null();
      }
      case Expr::Kind::Not: {
         auto v = as_truth(eval(n.children[0], row));
         return truth(v ? std::optional<bool>(!*v) : std::nullopt);
      }
      case Expr::Kind::Arith: {
         auto l = eval(n.children[0], row);
         auto r = eval(n.children[1], row);
         if (l.is_null() || r.is_null()) return Value::null();
         if (e.op == "/") {
            if (r.as_float() == 0.0) throw BindingError("division by zero");
            return Value(l.as_float() / r.as_float());
         }
         if (l.kind() == ValueKind::Int && r.kind() == ValueKind::Int) {
            auto a = l.as_int(), b = r.as_int();
            if (e.op == "+") return Value(a + b);
            if (e.op == "-") return Value(a - b);
            return Value(a * b);
         }
         auto a = l.as_float(), b = r.as_float();
         if (e.op == "+") return Value(a + b);
         if (e.op == "-") return Value(a - b);
         return Value(a * b);
      }
      case Expr::Kind::Neg: {
         auto v = eval(n.children[0], row);
         if (v.is_null()) return v;
         if (v.kind() == ValueKind::Int) return Value(-v.as_int());
         return Value(-v.as_float());
      }
      case Expr::Kind::Cast: return cast_value(eval(n.children[0], row), e.cast_to);
      case Expr::Kind::IsNull: return Value(eval(n.children[0], row).is_null());
      case Expr::Kind::IsNotNull: return Value(!eval(n.children[0], row).is_null());
      case Expr::Kind::SemRef: break;
   }
   throw BindingError("cannot evaluate " + to_sql(e));
}

Value BoundExpr::evaluate(const Tuple& row) const {
   return eval(root_, row);
}

bool BoundExpr::test(const Tuple& row) const {
   auto v = eval(root_, row);
   return !v.is_null() && v.as_bool();
}

std::vector<ExprPtr> split_conjuncts(const ExprPtr& e) {
   if (e->kind != Expr::Kind::And) return {e};
   auto l = split_conjuncts(e->args[0]);
   auto r = split_conjuncts(e->args[1]);
   l.insert(l.end(), r.begin(), r.end());
   return l;
}

} // namespace saber
