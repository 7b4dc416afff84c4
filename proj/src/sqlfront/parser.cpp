#include "saber/sqlfront/parser.hpp"
#include "saber/semkernel/prompt_template.hpp"
#include "saber/util/strings.hpp"
#include <algorithm>
#include <cctype>
#include <charconv>
#include <variant>

namespace saber::sql {

namespace {

const char* const kKeywords[] = {"SELECT", "FROM",  "WHERE",  "GROUP",  "ORDER", "BY",     "LIMIT", "AS",   "ON",   "JOIN",
                                 "INNER",  "CROSS", "UNION",  "EXCEPT", "INTERSECT", "ALL", "DISTINCT", "AND", "OR", "NOT",
                                 "IS",     "NULL",  "ASC",    "DESC",   "CAST",  "TRUE",   "FALSE", "LEFT", "RIGHT", "FULL",
                                 "OUTER",  "HAVING"};

bool is_keyword(const Token& t) {
   if (t.kind != TokenKind::Ident) return false;
   for (const char* k : kKeywords)
      if (util::iequals(t.text, k)) return true;
   return false;
}

bool is_aggregate_name(const Token& t) {
   return t.is_word("COUNT") || t.is_word("SUM") || t.is_word("AVG") || t.is_word("MIN") || t.is_word("MAX");
}

std::optional<ValueKind> type_name(std::string_view w) {
   auto u = util::to_upper(w);
   if (u == "INT" || u == "INTEGER" || u == "BIGINT" || u == "SMALLINT") return ValueKind::Int;
   if (u == "FLOAT" || u == "DOUBLE" || u == "REAL" || u == "NUMERIC" || u == "DECIMAL") return ValueKind::Float;
   if (u == "TEXT" || u == "VARCHAR" || u == "STRING" || u == "CHAR") return ValueKind::Text;
   if (u == "BOOL" || u == "BOOLEAN") return ValueKind::Bool;
   return std::nullopt;
}

struct SelectItem {
   enum class Kind { Star, QualifiedStar, Expr, Agg, SemSelect, SemAgg, SemDistinct };
   Kind kind = Kind::Expr;
   std::string qualifier;
   ExprPtr expr;
   std::string alias;
   AggItem agg;
   std::size_t call = 0;
   SourcePos pos;
};

struct SelectCore {
   bool distinct = false;
   std::vector<SelectItem> items;
   PlanPtr from;
   std::vector<ExprPtr> where;
   std::vector<ColumnName> group_keys;
   std::optional<std::size_t> sem_group;
   SourcePos pos;
};

struct OrderSpec {
   std::vector<SortKey> keys;
   std::optional<std::size_t> sem_call;
   SourcePos pos;
   bool present() const { return !keys.empty() || sem_call.has_value(); }
};

using QueryPart = std::variant<SelectCore, PlanPtr>;

class Parser {
   public:
   Parser(std::string_view sql, const Catalog* catalog) : sql_(sql), toks_(tokenize(sql)), catalog_(catalog) {
      set_limit(toks_.size() - 1);
   }

   ParsedQuery run() {
      auto plan = parse_query_expr();
      if (peek().is_symbol(";")) ++pos_;
      if (peek().kind != TokenKind::End) fail("unexpected '" + describe(peek()) + "'", peek());
      ParsedQuery q;
      q.plan = plan;
      q.sem_calls = std::move(calls_);
      q.source = std::string(sql_);
      return q;
   }

   private:
   // ---- token access -------------------------------------------------

   void set_limit(std::size_t limit) {
      limit_ = limit;
      end_ = toks_.back();
      end_.begin = end_.end = toks_[limit].begin;
      end_.line = toks_[limit].line;
      end_.column = toks_[limit].column;
      end_.kind = TokenKind::End;
      end_.text.clear();
   }

   const Token& peek(std::size_t ahead = 0) const { return pos_ + ahead < limit_ ? toks_[pos_ + ahead] : end_; }
   const Token& next() {
      const Token& t = peek();
      if (pos_ < limit_) ++pos_;
      return t;
   }
   bool accept_word(std::string_view w) {
      if (!peek().is_word(w)) return false;
      ++pos_;
      return true;
   }
   bool accept_symbol(std::string_view s) {
      if (!peek().is_symbol(s)) return false;
      ++pos_;
      return true;
   }
   static std::string describe(const Token& t) { return t.kind == TokenKind::End ? "end of input" : t.text; }

   [[noreturn]] static void fail(const std::string& msg, const Token& at) { throw SyntaxError(msg, at.pos()); }

   void expect_word(std::string_view w) {
      if (!accept_word(w)) fail("expected " + std::string(w) + " but found '" + describe(peek()) + "'", peek());
   }
   void expect_symbol(std::string_view s) {
      if (!accept_symbol(s)) fail("expected '" + std::string(s) + "' but found '" + describe(peek()) + "'", peek());
   }
   std::string expect_ident(const char* what) {
      const Token& t = peek();
      if (t.kind != TokenKind::Ident || is_keyword(t)) fail(std::string("expected ") + what + " but found '" + describe(t) + "'", t);
      ++pos_;
      return t.text;
   }

   /// A comma continues the current list unless it starts the next argument
   /// of an enclosing semantic call.
   bool list_continues() const {
      if (!peek().is_symbol(",")) return false;
      const Token& n = peek(1);
      return !(n.is_word("SELECT") || n.kind == TokenKind::String || n.kind == TokenKind::End);
   }

   bool at_sem_call() const { return detail::is_sem_name(peek()) && peek(1).is_symbol("("); }

   // ---- semantic calls -------------------------------------------------

   /// Reads the call at pos_, registers it and leaves pos_ after ')' (and
   /// after "AS alias" when the call has one).
   std::pair<std::size_t, detail::CallTokens> take_call() {
      auto ct = detail::read_call(sql_, toks_, pos_);
      if (ct.close >= limit_) fail("unbalanced parenthesis", toks_[pos_ + 1]);
      auto call = detail::describe_call(sql_, toks_, ct);
      if (!parents_.empty()) call.parent = parents_.back();
      calls_.push_back(std::move(call));
      pos_ = ct.close + 1;
      return {calls_.size() - 1, ct};
   }

   SemSpec spec_of(std::size_t idx) const {
      const auto& c = calls_[idx];
      return {c.template_text, c.backend.value_or("")};
   }

   [[noreturn]] void placement(const Token& at) {
      fail(util::to_upper(at.text) + " is not allowed here", at);
   }

   PlanPtr parse_arg_query(const detail::CallTokens& ct, std::size_t arg) {
      auto [first, last] = ct.args.at(arg);
      auto save_pos = pos_;
      auto save_limit = limit_;
      pos_ = first;
      set_limit(last);
      auto plan = parse_query_expr();
      if (peek().kind != TokenKind::End) fail("unexpected '" + describe(peek()) + "' in query argument", peek());
      pos_ = save_pos;
      set_limit(save_limit);
      return plan;
   }

   /// SEM_EXCEPT_ALL / SEM_INTERSECT_ALL / SEM_DISTINCT in query position.
   PlanPtr parse_sem_query() {
      const Token& name = peek();
      auto kind = sem_call_kind(name.text);
      if (!kind) detail::read_call(sql_, toks_, pos_); // throws the unsupported-operator error
      if (*kind != SemCallKind::ExceptAll && *kind != SemCallKind::IntersectAll && *kind != SemCallKind::Distinct) placement(name);
      auto [idx, ct] = take_call();
      parents_.push_back(idx);
      PlanPtr out;
      const auto& call = calls_[idx];
      if (*kind == SemCallKind::Distinct) {
         if (call.attribute) fail("SEM_DISTINCT(attribute) is only allowed as a SELECT item", name);
         auto [first, last] = ct.args[0];
         std::optional<SemCallKind> inner;
         if (detail::is_sem_name(toks_[first]) && toks_[first + 1].is_symbol("(")) {
            auto ik = sem_call_kind(toks_[first].text);
            if (ik && (*ik == SemCallKind::ExceptAll || *ik == SemCallKind::IntersectAll) &&
                detail::read_call(sql_, toks_, first).close + 1 == last)
               inner = ik;
         }
         if (inner) {
            auto save = pos_;
            pos_ = first;
            auto [iidx, ict] = take_call();
            parents_.push_back(iidx);
            auto l = parse_arg_query(ict, 0);
            auto r = parse_arg_query(ict, 1);
            parents_.pop_back();
            pos_ = save;
            std::string backend = calls_[iidx].backend.value_or(calls_[idx].backend.value_or(""));
            auto op = *inner == SemCallKind::ExceptAll ? OpKind::SemSetDiff : OpKind::SemSetIntersect;
            out = plan::with_sources(plan::set_op(op, l, r, backend), {idx, iidx});
         } else {
            auto q = parse_arg_query(ct, 0);
            std::string backend = calls_[idx].backend.value_or("");
            if (q->kind == OpKind::BagUnion) out = plan::with_sources(plan::set_op(OpKind::SemSetUnion, q->child(0), q->child(1), backend), {idx});
            else out = plan::with_sources(plan::sem_dedup(q, std::nullopt, backend), {idx});
         }
      } else {
         auto l = parse_arg_query(ct, 0);
         auto r = parse_arg_query(ct, 1);
         auto op = *kind == SemCallKind::ExceptAll ? OpKind::SemBagDiff : OpKind::SemBagIntersect;
         out = plan::with_sources(plan::set_op(op, l, r, calls_[idx].backend.value_or("")), {idx});
      }
      parents_.pop_back();
      if (!calls_[idx].alias.empty()) fail("a query-valued semantic call takes no alias", name);
      return out;
   }

   // ---- queries --------------------------------------------------------

   PlanPtr parse_query_expr() {
      QueryPart part = parse_union_level();
      OrderSpec order = parse_order_by();
      std::optional<std::int64_t> limit = parse_limit();
      if (auto* core = std::get_if<SelectCore>(&part)) return plan_core(*core, order, limit);
      PlanPtr p = std::get<PlanPtr>(part);
      if (order.sem_call) {
         const auto& c = calls_[*order.sem_call];
         p = plan::with_sources(plan::sem_sort(p, c.attribute, spec_of(*order.sem_call)), {*order.sem_call});
      } else if (!order.keys.empty()) {
         p = plan::sort(p, order.keys);
      }
      if (limit) p = plan::topk(p, *limit);
      return p;
   }

   PlanPtr to_plan(QueryPart part) {
      if (auto* core = std::get_if<SelectCore>(&part)) return plan_core(*core, {}, std::nullopt);
      return std::get<PlanPtr>(part);
   }

   QueryPart parse_union_level() {
      QueryPart left = parse_intersect_level();
      for (;;) {
         OpKind set_kind, bag_kind;
         if (peek().is_word("UNION")) {
            set_kind = OpKind::SetUnion;
            bag_kind = OpKind::BagUnion;
         } else if (peek().is_word("EXCEPT")) {
            set_kind = OpKind::SetDiff;
            bag_kind = OpKind::BagDiff;
         } else {
            return left;
         }
         ++pos_;
         bool all = accept_word("ALL");
         if (!all) accept_word("DISTINCT");
         QueryPart right = parse_intersect_level();
         left = plan::set_op(all ? bag_kind : set_kind, to_plan(std::move(left)), to_plan(std::move(right)));
      }
   }

   QueryPart parse_intersect_level() {
      QueryPart left = parse_query_primary();
      while (accept_word("INTERSECT")) {
         bool all = accept_word("ALL");
         if (!all) accept_word("DISTINCT");
         QueryPart right = parse_query_primary();
         left = plan::set_op(all ? OpKind::BagIntersect : OpKind::SetIntersect, to_plan(std::move(left)), to_plan(std::move(right)));
      }
      return left;
   }

   QueryPart parse_query_primary() {
      if (accept_symbol("(")) {
         auto p = parse_query_expr();
         expect_symbol(")");
         return p;
      }
      if (at_sem_call()) return parse_sem_query();
      if (peek().is_word("SELECT")) return parse_select_core();
      fail("expected a query but found '" + describe(peek()) + "'", peek());
   }

   SelectCore parse_select_core() {
      SelectCore core;
      core.pos = peek().pos();
      expect_word("SELECT");
      core.distinct = accept_word("DISTINCT");
      for (;;) {
         core.items.push_back(parse_select_item());
         if (!peek().is_symbol(",")) break;
         if (peek(1).is_word("FROM")) {
            ++pos_; // trailing comma before FROM
            break;
         }
         ++pos_;
      }
      expect_word("FROM");
      core.from = parse_from();
      if (accept_word("WHERE")) {
         auto cond = parse_expr();
         for (const auto& c : split_conjuncts(cond)) {
            if (c->kind != Expr::Kind::SemRef && contains_sem_ref(*c)) {
               auto where = calls_[first_sem_ref(*c)];
               throw SyntaxError("SEM_WHERE may only appear as a top-level AND term of WHERE", position_of(sql_, where.span.begin));
            }
            core.where.push_back(c);
         }
      }
      if (accept_word("GROUP")) {
         expect_word("BY");
         if (at_sem_call()) {
            const Token& name = peek();
            if (sem_call_kind(name.text) != SemCallKind::GroupBy) {
               if (!sem_call_kind(name.text)) detail::read_call(sql_, toks_, pos_);
               placement(name);
            }
            core.sem_group = take_call().first;
            if (peek().is_symbol(",") && list_continues()) fail("SEM_GROUP_BY must be the only GROUP BY item", peek());
         } else {
            for (;;) {
               core.group_keys.push_back(parse_column_name());
               if (!list_continues()) break;
               ++pos_;
            }
         }
      }
      if (peek().is_word("HAVING")) fail("HAVING is not supported", peek());
      return core;
   }

   static std::size_t first_sem_ref(const Expr& e) {
      if (e.kind == Expr::Kind::SemRef) return e.sem_call;
      for (const auto& a : e.args)
         if (contains_sem_ref(*a)) return first_sem_ref(*a);
      return 0;
   }

   ColumnName parse_column_name() {
      std::string first = expect_ident("a column name");
      if (accept_symbol(".")) return {first, expect_ident("a column name")};
      return {"", first};
   }

   std::string parse_alias() {
      if (accept_word("AS")) return expect_ident("an alias");
      if (peek().kind == TokenKind::Ident && !is_keyword(peek()) && !at_sem_call()) return next().text;
      return {};
   }

   SelectItem parse_select_item() {
      SelectItem item;
      item.pos = peek().pos();
      if (accept_symbol("*")) {
         item.kind = SelectItem::Kind::Star;
         return item;
      }
      if (peek().kind == TokenKind::Ident && peek(1).is_symbol(".") && peek(2).is_symbol("*")) {
         item.kind = SelectItem::Kind::QualifiedStar;
         item.qualifier = next().text;
         pos_ += 2;
         return item;
      }
      if (at_sem_call()) {
         const Token& name = peek();
         auto kind = sem_call_kind(name.text);
         if (!kind) detail::read_call(sql_, toks_, pos_);
         if (*kind == SemCallKind::Select || *kind == SemCallKind::Agg ||
             (*kind == SemCallKind::Distinct && describe_ahead_is_attribute())) {
            auto [idx, ct] = take_call();
            (void)ct;
            item.call = idx;
            if (accept_word("AS")) expect_ident("an alias");
            item.alias = calls_[idx].alias;
            if (*kind == SemCallKind::Select) {
               item.kind = SelectItem::Kind::SemSelect;
            } else if (*kind == SemCallKind::Agg) {
               item.kind = SelectItem::Kind::SemAgg;
               item.agg.func = AggFunc::Semantic;
               item.agg.arg = calls_[idx].attribute;
               item.agg.sem = spec_of(idx);
            } else {
               item.kind = SelectItem::Kind::SemDistinct;
               const auto& attr = *calls_[idx].attribute;
               item.expr = Expr::make_column(attr.qualifier, attr.name);
            }
            return item;
         }
         placement(name);
      }
      if (is_aggregate_name(peek()) && peek(1).is_symbol("(")) {
         const Token& fn = next();
         ++pos_;
         item.kind = SelectItem::Kind::Agg;
         if (fn.is_word("COUNT") && accept_symbol("*")) {
            item.agg.func = AggFunc::CountStar;
         } else {
            if (accept_word("DISTINCT")) fail("aggregate DISTINCT is not supported", fn);
            item.agg.arg = parse_column_name();
            auto u = util::to_upper(fn.text);
            item.agg.func = u == "COUNT" ? AggFunc::Count : u == "SUM" ? AggFunc::Sum : u == "AVG" ? AggFunc::Avg : u == "MIN" ? AggFunc::Min : AggFunc::Max;
         }
         expect_symbol(")");
         item.alias = parse_alias();
         item.agg.alias = item.alias;
         if (!(peek().is_symbol(",") || peek().is_word("FROM")))
            fail("aggregates are only supported as whole SELECT items", peek());
         return item;
      }
      item.kind = SelectItem::Kind::Expr;
      item.expr = parse_expr();
      item.alias = parse_alias();
      return item;
   }

   bool describe_ahead_is_attribute() const {
      auto ct = detail::read_call(sql_, toks_, pos_);
      auto call = detail::describe_call(sql_, toks_, ct);
      return call.attribute.has_value();
   }

   PlanPtr parse_from() {
      PlanPtr left = parse_from_item();
      for (;;) {
         if (list_continues()) {
            ++pos_;
            left = plan::product(left, parse_from_item());
         } else if (accept_word("CROSS")) {
            expect_word("JOIN");
            left = plan::product(left, parse_from_item());
         } else if (peek().is_word("JOIN") || (peek().is_word("INNER") && peek(1).is_word("JOIN"))) {
            accept_word("INNER");
            ++pos_;
            auto right = parse_from_item();
            expect_word("ON");
            auto on_pos = peek();
            auto on = parse_expr();
            left = plan_join(left, right, on, on_pos);
         } else if (peek().is_word("LEFT") || peek().is_word("RIGHT") || peek().is_word("FULL")) {
            fail("outer joins are not supported", peek());
         } else {
            return left;
         }
      }
   }

   /// JOIN .. ON with one SEM_WHERE conjunct becomes a SemJoin; the other
   /// conjuncts filter its output.
   PlanPtr plan_join(PlanPtr left, PlanPtr right, const ExprPtr& on, const Token& at) {
      if (!contains_sem_ref(*on)) return plan::join(left, right, on);
      std::optional<std::size_t> sem;
      std::vector<ExprPtr> rest;
      for (const auto& c : split_conjuncts(on)) {
         if (c->kind == Expr::Kind::SemRef && calls_[c->sem_call].kind == SemCallKind::Where && !sem) sem = c->sem_call;
         else if (contains_sem_ref(*c)) fail("ON accepts at most one SEM_WHERE, as a top-level AND operand", at);
         else rest.push_back(c);
      }
      PlanPtr p = plan::with_sources(plan::sem_join(left, right, spec_of(*sem)), {*sem});
      for (const auto& c : rest) p = plan::select(p, c);
      return p;
   }

   PlanPtr parse_from_item() {
      if (at_sem_call()) {
         const Token& name = peek();
         auto kind = sem_call_kind(name.text);
         if (!kind) detail::read_call(sql_, toks_, pos_);
         if (*kind != SemCallKind::Join) placement(name);
         auto [idx, ct] = take_call();
         (void)ct;
         const auto& c = calls_[idx];
         if (!c.alias.empty()) fail("SEM_JOIN takes no alias; alias its tables instead", name);
         auto l = plan::scan(c.tables[0].table, c.tables[0].alias);
         auto r = plan::scan(c.tables[1].table, c.tables[1].alias);
         return plan::with_sources(plan::sem_join(l, r, spec_of(idx)), {idx});
      }
      if (peek().is_symbol("(")) fail("subqueries in FROM are not supported", peek());
      std::string table = expect_ident("a table name");
      std::string alias = parse_alias();
      return plan::scan(table, alias.empty() ? table : alias);
   }

   OrderSpec parse_order_by() {
      OrderSpec spec;
      if (!peek().is_word("ORDER")) return spec;
      spec.pos = peek().pos();
      ++pos_;
      expect_word("BY");
      if (at_sem_call()) {
         const Token& name = peek();
         auto kind = sem_call_kind(name.text);
         if (!kind) detail::read_call(sql_, toks_, pos_);
         if (*kind != SemCallKind::OrderBy) placement(name);
         spec.sem_call = take_call().first;
         if (accept_word("DESC")) {
         } else if (peek().is_word("ASC")) {
            fail("SEM_ORDER_BY always sorts by descending score", peek());
         }
         if (list_continues()) fail("SEM_ORDER_BY must be the only ORDER BY item", peek());
         return spec;
      }
      for (;;) {
         SortKey key;
         key.expr = parse_expr();
         if (contains_sem_ref(*key.expr)) fail("SEM_WHERE is not allowed in ORDER BY", peek());
         if (accept_word("DESC")) key.descending = true;
         else accept_word("ASC");
         spec.keys.push_back(std::move(key));
         if (!list_continues()) break;
         ++pos_;
      }
      return spec;
   }

   std::optional<std::int64_t> parse_limit() {
      if (!accept_word("LIMIT")) return std::nullopt;
      const Token& t = next();
      std::int64_t k = 0;
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), k);
      if (t.kind != TokenKind::Number || ec != std::errc() || p != t.text.data() + t.text.size()) fail("LIMIT expects an integer", t);
      if (k < 0) fail("LIMIT must not be negative", t);
      return k;
   }

   // ---- expressions ----------------------------------------------------

   ExprPtr parse_expr() { return parse_or(); }

   ExprPtr parse_or() {
      auto l = parse_and();
      while (accept_word("OR")) l = Expr::make_or(l, parse_and());
      return l;
   }
   ExprPtr parse_and() {
      auto l = parse_not();
      while (accept_word("AND")) l = Expr::make_and(l, parse_not());
      return l;
   }
   ExprPtr parse_not() {
      if (accept_word("NOT")) return Expr::make_not(parse_not());
      return parse_comparison();
   }
   ExprPtr parse_comparison() {
      auto l = parse_additive();
      for (;;) {
         const Token& t = peek();
         if (t.kind == TokenKind::Symbol && (t.text == "=" || t.text == "<>" || t.text == "!=" || t.text == "<" || t.text == "<=" ||
                                             t.text == ">" || t.text == ">=")) {
            ++pos_;
            l = Expr::make_compare(t.text, l, parse_additive());
         } else if (t.is_word("IS")) {
            ++pos_;
            bool negated = accept_word("NOT");
            expect_word("NULL");
            l = Expr::make_is_null(l, negated);
         } else {
            return l;
         }
      }
   }
   ExprPtr parse_additive() {
      auto l = parse_multiplicative();
      while (peek().is_symbol("+") || peek().is_symbol("-")) {
         std::string op = next().text;
         l = Expr::make_arith(op, l, parse_multiplicative());
      }
      return l;
   }
   ExprPtr parse_multiplicative() {
      auto l = parse_unary();
      while (peek().is_symbol("*") || peek().is_symbol("/")) {
         std::string op = next().text;
         l = Expr::make_arith(op, l, parse_unary());
      }
      return l;
   }
   ExprPtr parse_unary() {
      if (peek().is_symbol("-")) {
         ++pos_;
         if (peek().kind == TokenKind::Number) return number_literal(next(), true);
         return Expr::make_neg(parse_unary());
      }
      if (accept_symbol("+")) return parse_unary();
      return parse_primary();
   }

   ExprPtr number_literal(const Token& t, bool negative) {
      std::string text = (negative ? "-" : "") + t.text;
      bool is_float = t.text.find_first_of(".eE") != std::string::npos;
      if (!is_float) {
         std::int64_t v = 0;
         auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
         if (ec == std::errc() && p == text.data() + text.size()) return Expr::make_literal(Value(v));
      }
      auto v = parse_as(text, ValueKind::Float);
      if (!v) fail("invalid number '" + text + "'", t);
      return Expr::make_literal(*v);
   }

   ExprPtr parse_primary() {
      const Token& t = peek();
      switch (t.kind) {
         case TokenKind::Number: ++pos_; return number_literal(t, false);
         case TokenKind::String: ++pos_; return Expr::make_literal(Value(t.text));
         case TokenKind::Symbol:
            if (accept_symbol("(")) {
               if (peek().is_word("SELECT")) fail("subqueries are not supported in expressions", peek());
               auto e = parse_expr();
               expect_symbol(")");
               return e;
            }
            fail("expected an expression but found '" + t.text + "'", t);
         case TokenKind::End: fail("expected an expression but found end of input", t);
         case TokenKind::Ident: break;
      }
      if (t.is_word("NULL")) {
         ++pos_;
         return Expr::make_literal(Value::null());
      }
      if (t.is_word("TRUE") || t.is_word("FALSE")) {
         ++pos_;
         return Expr::make_literal(Value(t.is_word("TRUE")));
      }
      if (t.is_word("CAST") && peek(1).is_symbol("(")) {
         pos_ += 2;
         auto e = parse_expr();
         expect_word("AS");
         const Token& ty = next();
         auto kind = ty.kind == TokenKind::Ident ? type_name(ty.text) : std::nullopt;
         if (!kind) fail("unknown type '" + describe(ty) + "'", ty);
         if (accept_symbol("(")) { // VARCHAR(20), DECIMAL(5, 2)
            while (!peek().is_symbol(")") && peek().kind != TokenKind::End) ++pos_;
            expect_symbol(")");
         }
         expect_symbol(")");
         return Expr::make_cast(e, *kind);
      }
      if (at_sem_call()) {
         auto kind = sem_call_kind(t.text);
         if (!kind) detail::read_call(sql_, toks_, pos_);
         if (*kind != SemCallKind::Where) placement(t);
         auto idx = take_call().first;
         return Expr::make_sem_ref(idx);
      }
      if (peek(1).is_symbol("(")) {
         if (is_aggregate_name(t)) fail("aggregates are only supported as whole SELECT items", t);
         fail("unknown function '" + t.text + "'", t);
      }
      if (is_keyword(t)) fail("unexpected keyword '" + t.text + "'", t);
      auto col = parse_column_name();
      return Expr::make_column(col.qualifier, col.name);
   }

   // ---- planning -------------------------------------------------------

   Schema from_schema(const SelectCore& core, const SelectItem& item) const {
      if (!catalog_) throw BindingError("expanding '*' next to other select items needs table schemas");
      (void)item;
      return derive_schema(core.from, *catalog_);
   }

   /// Output columns (qualifier, name) of a select list, when they can be
   /// named without a catalog; nullopt for a lone "*".
   struct OutputName {
      std::string qualifier;
      std::string name;
   };

   std::optional<std::vector<OutputName>> output_names(const SelectCore& core) const {
      if (core.items.size() == 1 && core.items[0].kind == SelectItem::Kind::Star) return std::nullopt;
      std::vector<OutputName> out;
      for (std::size_t i = 0; i < core.items.size(); ++i) {
         const auto& item = core.items[i];
         switch (item.kind) {
            case SelectItem::Kind::Star:
            case SelectItem::Kind::QualifiedStar: {
               if (!catalog_) break;
               for (const auto& c : derive_schema(core.from, *catalog_).columns())
                  if (item.kind == SelectItem::Kind::Star || util::iequals(c.qualifier, item.qualifier)) out.push_back({c.qualifier, c.name});
               break;
            }
            case SelectItem::Kind::Expr:
            case SelectItem::Kind::SemDistinct:
               if (!item.alias.empty()) out.push_back({"", item.alias});
               else if (item.expr->kind == Expr::Kind::Column) out.push_back({item.expr->column.qualifier, item.expr->column.name});
               break;
            case SelectItem::Kind::Agg: out.push_back({"", item.agg.output_name()}); break;
            case SelectItem::Kind::SemAgg:
            case SelectItem::Kind::SemSelect: out.push_back({"", item.alias}); break;
         }
      }
      return out;
   }

   static bool resolves(const ColumnName& ref, const std::optional<std::vector<OutputName>>& names) {
      if (!names) return true;
      int hits = 0;
      for (const auto& n : *names) {
         if (!util::iequals(n.name, ref.name)) continue;
         if (ref.qualifier.empty() || util::iequals(ref.qualifier, n.qualifier)) ++hits;
      }
      return hits == 1;
   }

   PlanPtr plan_core(SelectCore& core, const OrderSpec& order, std::optional<std::int64_t> limit) {
      PlanPtr p = core.from;
      for (const auto& c : core.where) {
         if (c->kind == Expr::Kind::SemRef) p = plan::with_sources(plan::sem_select(p, spec_of(c->sem_call)), {c->sem_call});
         else p = plan::select(p, c);
      }

      // Default names for unnamed semantic columns.
      std::size_t sem_select_n = 0, sem_agg_n = 0;
      for (auto& item : core.items) {
         if (item.kind == SelectItem::Kind::SemSelect && item.alias.empty()) item.alias = "sem_select_" + std::to_string(++sem_select_n);
         else if (item.kind == SelectItem::Kind::SemSelect) ++sem_select_n;
         if (item.kind == SelectItem::Kind::SemAgg) {
            ++sem_agg_n;
            if (item.alias.empty()) item.alias = "sem_agg_" + std::to_string(sem_agg_n);
            item.agg.alias = item.alias;
         }
      }
      for (const auto& item : core.items)
         if (item.kind == SelectItem::Kind::SemSelect)
            p = plan::with_sources(plan::sem_project(p, spec_of(item.call), item.alias), {item.call});

      bool has_agg = std::any_of(core.items.begin(), core.items.end(), [](const SelectItem& i) {
         return i.kind == SelectItem::Kind::Agg || i.kind == SelectItem::Kind::SemAgg;
      });
      bool grouped = has_agg || !core.group_keys.empty();
      std::vector<ColumnName> keys = core.group_keys;
      if (core.sem_group) {
         const auto& c = calls_[*core.sem_group];
         p = plan::with_sources(plan::sem_group(p, *c.attribute, c.k, c.backend.value_or("")), {*core.sem_group});
         if (has_agg) keys = {ColumnName{"", kGroupIdColumn}};
      }

      auto names = output_names(core);
      bool sort_below = false;
      if (order.sem_call) {
         const auto& c = calls_[*order.sem_call];
         if (c.attribute) sort_below = !resolves(*c.attribute, names);
         for (const auto& ph : extract_placeholders(c.template_text)) sort_below = sort_below || !resolves(ph.column, names);
      } else {
         for (const auto& k : order.keys)
            for (const auto& ref : referenced_columns(*k.expr)) sort_below = sort_below || !resolves(ref, names);
      }
      bool has_sem_distinct = std::any_of(core.items.begin(), core.items.end(), [](const SelectItem& i) { return i.kind == SelectItem::Kind::SemDistinct; });
      if (sort_below && (grouped || core.distinct || has_sem_distinct))
         throw SyntaxError("ORDER BY must use output columns when the query has DISTINCT or grouping", position_of(sql_, order.pos.offset));

      auto add_sort = [&](PlanPtr in) {
         if (order.sem_call) {
            const auto& c = calls_[*order.sem_call];
            return plan::with_sources(plan::sem_sort(in, c.attribute, spec_of(*order.sem_call)), {*order.sem_call});
         }
         return plan::sort(in, order.keys);
      };

      if (grouped) {
         std::vector<AggItem> aggs;
         std::vector<std::size_t> sources;
         for (const auto& item : core.items) {
            if (item.kind == SelectItem::Kind::Agg || item.kind == SelectItem::Kind::SemAgg) {
               aggs.push_back(item.agg);
               if (item.kind == SelectItem::Kind::SemAgg) sources.push_back(item.call);
            }
         }
         if (!core.group_keys.empty()) p = plan::group(p, keys);
         p = plan::aggregate(p, keys, aggs);
         if (!sources.empty()) p = plan::with_sources(p, sources);

         // Select list over the aggregate output (keys first, then aggregates).
         std::vector<ProjectItem> items;
         bool identity = true;
         std::size_t agg_i = 0, pos = 0;
         for (const auto& item : core.items) {
            switch (item.kind) {
               case SelectItem::Kind::Agg:
               case SelectItem::Kind::SemAgg:
                  items.push_back({Expr::make_column("", item.agg.output_name()), ""});
                  identity = identity && pos == keys.size() + agg_i;
                  ++agg_i;
                  break;
               case SelectItem::Kind::Expr: {
                  if (item.expr->kind != Expr::Kind::Column)
                     throw SyntaxError("only grouping columns and aggregates may appear in a grouped SELECT", item.pos);
                  const auto& ref = item.expr->column;
                  auto it = std::find_if(keys.begin(), keys.end(), [&](const ColumnName& k) {
                     return util::iequals(k.name, ref.name) && (ref.qualifier.empty() || k.qualifier.empty() || util::iequals(k.qualifier, ref.qualifier));
                  });
                  if (it == keys.end()) throw SyntaxError("column " + ref.to_string() + " must appear in GROUP BY", item.pos);
                  items.push_back({item.expr, item.alias});
                  identity = identity && item.alias.empty() && pos == static_cast<std::size_t>(it - keys.begin()) && exprs_equal(item.expr, Expr::make_column(it->qualifier, it->name));
                  break;
               }
               default: throw SyntaxError("only grouping columns and aggregates may appear in a grouped SELECT", item.pos);
            }
            ++pos;
         }
         if (!(identity && items.size() == keys.size() + aggs.size())) p = plan::project(p, items);
      } else {
         if (sort_below && order.present()) p = add_sort(p);
         bool star_only = core.items.size() == 1 && core.items[0].kind == SelectItem::Kind::Star;
         if (!star_only) {
            std::vector<ProjectItem> items;
            for (const auto& item : core.items) {
               switch (item.kind) {
                  case SelectItem::Kind::Star:
                  case SelectItem::Kind::QualifiedStar: {
                     bool any = false;
                     for (const auto& c : from_schema(core, item).columns()) {
                        if (item.kind == SelectItem::Kind::QualifiedStar && !util::iequals(c.qualifier, item.qualifier)) continue;
                        items.push_back({Expr::make_column(c.qualifier, c.name), ""});
                        any = true;
                     }
                     if (!any) throw BindingError("no table named '" + item.qualifier + "' for " + item.qualifier + ".*");
                     break;
                  }
                  case SelectItem::Kind::Expr:
                  case SelectItem::Kind::SemDistinct: items.push_back({item.expr, item.alias}); break;
                  case SelectItem::Kind::SemSelect: items.push_back({Expr::make_column("", item.alias), ""}); break;
                  default: break;
               }
            }
            p = plan::project(p, items);
         }
      }

      if (core.distinct) p = plan::dedup(p);
      for (const auto& item : core.items) {
         if (item.kind != SelectItem::Kind::SemDistinct) continue;
         ColumnName attr = item.alias.empty() ? item.expr->column : ColumnName{"", item.alias};
         p = plan::with_sources(plan::sem_dedup(p, attr, calls_[item.call].backend.value_or("")), {item.call});
      }
      if (!sort_below && order.present()) p = add_sort(p);
      if (limit) p = plan::topk(p, *limit);
      return p;
   }

   std::string_view sql_;
   std::vector<Token> toks_;
   const Catalog* catalog_;
   std::size_t pos_ = 0;
   std::size_t limit_ = 0;
   Token end_;
   std::vector<SemCall> calls_;
   std::vector<std::size_t> parents_;
};

} // namespace

ParsedQuery parse_query(std::string_view sql, const Catalog* catalog) {
   scan_semantic_calls(sql); // balance and operator-name checks with precise positions
   return Parser(sql, catalog).run();
}

} // namespace saber::sql

namespace saber::sql {

std::string substitute_materialized(std::string_view sql, const std::map<Span, std::string>& bindings) {
   std::string out;
   std::size_t at = 0;
   for (const auto& c : scan_semantic_calls(sql)) {
      auto it = bindings.find(c.span);
      if (it == bindings.end())
         throw BindingError(std::string("no materialized table for ") + to_string(c.kind) + " at offset " + std::to_string(c.span.begin));
      const std::string t = to_sql(*Expr::make_column("", it->second));
      out.append(sql.substr(at, c.span.begin - at));
      at = c.span.end;
      switch (c.kind) {
         case SemCallKind::Where: out += t + ".keep"; break;
         case SemCallKind::Select: out += t + ".value"; break;
         case SemCallKind::Distinct:
            if (c.attribute) out += t + ".value";
            else out += "(SELECT * FROM " + t + ")";
            break;
         case SemCallKind::ExceptAll:
         case SemCallKind::IntersectAll: out += "(SELECT * FROM " + t + ")"; break;
         case SemCallKind::Agg: out += "MAX(" + t + ".value)"; break;
         case SemCallKind::GroupBy: out += t + ".group_id"; break;
         case SemCallKind::Join: out += t; break;
         case SemCallKind::OrderBy: {
            out += t + ".score DESC";
            // Swallow an explicit DESC so it is not doubled.
            std::size_t j = at;
            while (j < sql.size() && std::isspace(static_cast<unsigned char>(sql[j]))) ++j;
            if (util::iequals(sql.substr(j, 4), "DESC") && (j + 4 >= sql.size() || !(std::isalnum(static_cast<unsigned char>(sql[j + 4])) || sql[j + 4] == '_')))
               at = j + 4;
            break;
         }
      }
   }
   out.append(sql.substr(at));
   return out;
}

namespace {

[[noreturn]] void no_sql(const PlanNode& n) {
   throw BindingError(std::string("plan has no SQL form: ") + to_string(n.kind));
}

std::string ident(const std::string& name) {
   return to_sql(*Expr::make_column("", name));
}

std::string where_term(const ExprPtr& e) {
   return e->kind == Expr::Kind::Or ? "(" + to_sql(*e) + ")" : to_sql(*e);
}

std::string agg_sql(const AggItem& a) {
   std::string s;
   switch (a.func) {
      case AggFunc::CountStar: s = "COUNT(*)"; break;
      case AggFunc::Semantic: throw BindingError("plan has no SQL form: SemAgg");
      default: s = util::to_upper(to_string(a.func)) + "(" + to_sql(*Expr::make_column(a.arg->qualifier, a.arg->name)) + ")"; break;
   }
   if (!a.alias.empty()) s += " AS " + ident(a.alias);
   return s;
}

std::string unparse_query(const PlanPtr& p);

std::string from_sql(const PlanPtr& p) {
   switch (p->kind) {
      case OpKind::Scan: {
         const auto& a = p->args<ScanArgs>();
         std::string s = ident(a.table);
         if (!a.alias.empty() && a.alias != a.table) s += " AS " + ident(a.alias);
         return s;
      }
      case OpKind::Product:
      case OpKind::Join: {
         const auto& r = p->child(1);
         if (r->kind != OpKind::Scan) throw BindingError("plan has no SQL form: right-nested join");
         std::string s = from_sql(p->child(0));
         if (p->kind == OpKind::Product) return s + " CROSS JOIN " + from_sql(r);
         return s + " JOIN " + from_sql(r) + " ON " + to_sql(*p->args<FilterArgs>().predicate);
      }
      default: no_sql(*p);
   }
}

std::string core_sql(PlanPtr p) {
   std::optional<std::int64_t> limit;
   std::vector<SortKey> order;
   if (p->kind == OpKind::TopK) {
      limit = p->args<LimitArgs>().k;
      p = p->child();
   }
   if (p->kind == OpKind::Sort) {
      order = p->args<SortArgs>().keys;
      p = p->child();
   }
   bool distinct = false;
   if (p->kind == OpKind::Dedup) {
      distinct = true;
      p = p->child();
   }
   std::vector<std::string> items;
   const ProjectArgs* project = nullptr;
   if (p->kind == OpKind::Project) {
      project = &p->args<ProjectArgs>();
      p = p->child();
      if (order.empty() && p->kind == OpKind::Sort) { // ORDER BY on a non-output column
         order = p->args<SortArgs>().keys;
         p = p->child();
      }
   }
   std::vector<std::string> group_by;
   if (p->kind == OpKind::Agg) {
      const auto& agg = p->args<AggArgs>();
      p = p->child();
      if (!agg.keys.empty()) {
         if (p->kind != OpKind::Group) no_sql(*p);
         p = p->child();
      }
      for (const auto& k : agg.keys) group_by.push_back(to_sql(*Expr::make_column(k.qualifier, k.name)));
      if (project) {
         for (const auto& it : project->items) {
            const AggItem* match = nullptr;
            if (it.expr->kind == Expr::Kind::Column && it.expr->column.qualifier.empty())
               for (const auto& a : agg.items)
                  if (util::iequals(a.output_name(), it.expr->column.name)) match = &a;
            if (match) items.push_back(agg_sql(*match));
            else items.push_back(to_sql(*it.expr) + (it.alias.empty() ? "" : " AS " + ident(it.alias)));
         }
      } else {
         items = group_by;
         for (const auto& a : agg.items) items.push_back(agg_sql(a));
      }
   } else if (project) {
      for (const auto& it : project->items) items.push_back(to_sql(*it.expr) + (it.alias.empty() ? "" : " AS " + ident(it.alias)));
   } else {
      items.push_back("*");
   }
   std::vector<std::string> where;
   while (p->kind == OpKind::Select) {
      where.insert(where.begin(), where_term(p->args<FilterArgs>().predicate));
      p = p->child();
   }
   std::string s = "SELECT " + std::string(distinct ? "DISTINCT " : "") + util::join(items, ", ") + " FROM " + from_sql(p);
   if (!where.empty()) s += " WHERE " + util::join(where, " AND ");
   if (!group_by.empty()) s += " GROUP BY " + util::join(group_by, ", ");
   if (!order.empty()) {
      std::vector<std::string> keys;
      for (const auto& k : order) keys.push_back(to_sql(*k.expr) + (k.descending ? " DESC" : ""));
      s += " ORDER BY " + util::join(keys, ", ");
   }
   if (limit) s += " LIMIT " + std::to_string(*limit);
   return s;
}

const char* set_keyword(OpKind k) {
   switch (k) {
      case OpKind::SetUnion: return "UNION";
      case OpKind::BagUnion: return "UNION ALL";
      case OpKind::SetDiff: return "EXCEPT";
      case OpKind::BagDiff: return "EXCEPT ALL";
      case OpKind::SetIntersect: return "INTERSECT";
      case OpKind::BagIntersect: return "INTERSECT ALL";
      default: return nullptr;
   }
}

std::string unparse_query(const PlanPtr& p) {
   // Sort / TopK over a set operation attach to the whole compound query.
   PlanPtr q = p;
   std::optional<std::int64_t> limit;
   std::vector<SortKey> order;
   if (q->kind == OpKind::TopK) {
      limit = q->args<LimitArgs>().k;
      q = q->child();
   }
   if (q->kind == OpKind::Sort) {
      order = q->args<SortArgs>().keys;
      q = q->child();
   }
   const char* kw = set_keyword(q->kind);
   if (!kw) {
      walk(p, [](const PlanNode& n) {
         if (is_semantic(n.kind)) no_sql(n);
      });
      return core_sql(p);
   }
   std::string s = "(" + unparse_query(q->child(0)) + ") " + kw + " (" + unparse_query(q->child(1)) + ")";
   if (!order.empty()) {
      std::vector<std::string> keys;
      for (const auto& k : order) keys.push_back(to_sql(*k.expr) + (k.descending ? " DESC" : ""));
      s += " ORDER BY " + util::join(keys, ", ");
   }
   if (limit) s += " LIMIT " + std::to_string(*limit);
   return s;
}

} // namespace

std::string unparse(const PlanPtr& plan) {
   walk(plan, [](const PlanNode& n) {
      if (is_semantic(n.kind)) no_sql(n);
   });
   return unparse_query(plan);
}

} // namespace saber::sql
