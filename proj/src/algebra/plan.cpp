#include "saber/algebra/plan.hpp"
#include "saber/error.hpp"
#include "saber/semkernel/prompt_template.hpp"
#include "saber/util/strings.hpp"
#include <algorithm>
#include <sstream>

namespace saber {

const char* to_string(OpKind kind) {
   switch (kind) {
      case OpKind::Scan: return "Scan";
      case OpKind::Select: return "Select";
      case OpKind::SemSelect: return "SemSelect";
      case OpKind::Project: return "Project";
      case OpKind::SemProjectCol: return "SemProjectCol";
      case OpKind::Product: return "Product";
      case OpKind::Join: return "Join";
      case OpKind::SemJoin: return "SemJoin";
      case OpKind::SetDiff: return "SetDiff";
      case OpKind::BagDiff: return "BagDiff";
      case OpKind::SemSetDiff: return "SemSetDiff";
      case OpKind::SemBagDiff: return "SemBagDiff";
      case OpKind::SetUnion: return "SetUnion";
      case OpKind::BagUnion: return "BagUnion";
      case OpKind::SemSetUnion: return "SemSetUnion";
      case OpKind::SetIntersect: return "SetIntersect";
      case OpKind::BagIntersect: return "BagIntersect";
      case OpKind::SemSetIntersect: return "SemSetIntersect";
      case OpKind::SemBagIntersect: return "SemBagIntersect";
      case OpKind::Group: return "Group";
      case OpKind::SemGroup: return "SemGroup";
      case OpKind::Agg: return "Agg";
      case OpKind::SemAgg: return "SemAgg";
      case OpKind::Dedup: return "Dedup";
      case OpKind::SemDedup: return "SemDedup";
      case OpKind::Sort: return "Sort";
      case OpKind::SemSort: return "SemSort";
      case OpKind::TopK: return "TopK";
   }
   return "?";
}

bool is_semantic(OpKind kind) {
   switch (kind) {
      case OpKind::SemSelect:
      case OpKind::SemProjectCol:
      case OpKind::SemJoin:
      case OpKind::SemSetDiff:
      case OpKind::SemBagDiff:
      case OpKind::SemSetUnion:
      case OpKind::SemSetIntersect:
      case OpKind::SemBagIntersect:
      case OpKind::SemGroup:
      case OpKind::SemAgg:
      case OpKind::SemDedup:
      case OpKind::SemSort: return true;
      default: return false;
   }
}

bool is_set_operation(OpKind kind) {
   switch (kind) {
      case OpKind::SetDiff:
      case OpKind::BagDiff:
      case OpKind::SemSetDiff:
      case OpKind::SemBagDiff:
      case OpKind::SetUnion:
      case OpKind::BagUnion:
      case OpKind::SemSetUnion:
      case OpKind::SetIntersect:
      case OpKind::BagIntersect:
      case OpKind::SemSetIntersect:
      case OpKind::SemBagIntersect: return true;
      default: return false;
   }
}

bool is_binary(OpKind kind) {
   return is_set_operation(kind) || kind == OpKind::Product || kind == OpKind::Join || kind == OpKind::SemJoin;
}

std::size_t arity(OpKind kind) {
   if (kind == OpKind::Scan) return 0;
   return is_binary(kind) ? 2 : 1;
}

const char* to_string(AggFunc f) {
   switch (f) {
      case AggFunc::CountStar:
      case AggFunc::Count: return "COUNT";
      case AggFunc::Sum: return "SUM";
      case AggFunc::Avg: return "AVG";
      case AggFunc::Min: return "MIN";
      case AggFunc::Max: return "MAX";
      case AggFunc::Semantic: return "SEM_AGG";
   }
   return "?";
}

std::string AggItem::output_name() const {
   if (!alias.empty()) return alias;
   std::string base = util::to_lower(to_string(func));
   if (func == AggFunc::CountStar) return "count";
   if (arg) return base + "_" + arg->name;
   return base;
}

const SemSpec* PlanNode::sem() const {
   if (auto p = std::get_if<SemPredicateArgs>(&payload)) return &p->sem;
   if (auto p = std::get_if<SemColumnArgs>(&payload)) return &p->sem;
   if (auto p = std::get_if<SemSortArgs>(&payload)) return &p->sem;
   return nullptr;
}

std::string PlanNode::backend() const {
   if (auto s = sem()) return s->backend;
   if (auto p = std::get_if<EquivArgs>(&payload)) return p->backend;
   if (auto p = std::get_if<SemGroupArgs>(&payload)) return p->backend;
   if (auto p = std::get_if<AggArgs>(&payload)) {
      for (const auto& item : p->items)
         if (item.func == AggFunc::Semantic) return item.sem.backend;
   }
   return {};
}

namespace {

bool names_equal(const ColumnName& a, const ColumnName& b) {
   return util::iequals(a.qualifier, b.qualifier) && util::iequals(a.name, b.name);
}

bool opt_names_equal(const std::optional<ColumnName>& a, const std::optional<ColumnName>& b) {
   if (a.has_value() != b.has_value()) return false;
   return !a || names_equal(*a, *b);
}

bool name_lists_equal(const std::vector<ColumnName>& a, const std::vector<ColumnName>& b) {
   if (a.size() != b.size()) return false;
   for (std::size_t i = 0; i < a.size(); ++i)
      if (!names_equal(a[i], b[i])) return false;
   return true;
}

struct PayloadEqual {
   bool operator()(const std::monostate&, const std::monostate&) const { return true; }
   bool operator()(const ScanArgs& a, const ScanArgs& b) const {
      return util::iequals(a.table, b.table) && util::iequals(a.alias, b.alias);
   }
   bool operator()(const FilterArgs& a, const FilterArgs& b) const { return exprs_equal(a.predicate, b.predicate); }
   bool operator()(const ProjectArgs& a, const ProjectArgs& b) const {
      if (a.items.size() != b.items.size()) return false;
      for (std::size_t i = 0; i < a.items.size(); ++i)
         if (!exprs_equal(a.items[i].expr, b.items[i].expr) || a.items[i].alias != b.items[i].alias) return false;
      return true;
   }
   bool operator()(const SemPredicateArgs& a, const SemPredicateArgs& b) const { return a.sem == b.sem; }
   bool operator()(const SemColumnArgs& a, const SemColumnArgs& b) const { return a.sem == b.sem && a.alias == b.alias; }
   bool operator()(const EquivArgs& a, const EquivArgs& b) const { return a.backend == b.backend && opt_names_equal(a.attr, b.attr); }
   bool operator()(const GroupArgs& a, const GroupArgs& b) const { return name_lists_equal(a.keys, b.keys); }
   bool operator()(const SemGroupArgs& a, const SemGroupArgs& b) const {
      return names_equal(a.attr, b.attr) && a.k == b.k && a.backend == b.backend;
   }
   bool operator()(const AggArgs& a, const AggArgs& b) const {
      if (!name_lists_equal(a.keys, b.keys) || a.items.size() != b.items.size()) return false;
      for (std::size_t i = 0; i < a.items.size(); ++i) {
         const auto &x = a.items[i], &y = b.items[i];
         if (x.func != y.func || !opt_names_equal(x.arg, y.arg) || !(x.sem == y.sem) || x.alias != y.alias) return false;
      }
      return true;
   }
   bool operator()(const SortArgs& a, const SortArgs& b) const {
      if (a.keys.size() != b.keys.size()) return false;
      for (std::size_t i = 0; i < a.keys.size(); ++i)
         if (a.keys[i].descending != b.keys[i].descending || !exprs_equal(a.keys[i].expr, b.keys[i].expr)) return false;
      return true;
   }
   bool operator()(const SemSortArgs& a, const SemSortArgs& b) const { return opt_names_equal(a.attr, b.attr) && a.sem == b.sem; }
   bool operator()(const LimitArgs& a, const LimitArgs& b) const { return a.k == b.k; }
   template <class A, class B>
   bool operator()(const A&, const B&) const { return false; }
};

PlanPtr make(OpKind kind, Payload payload, std::vector<PlanPtr> children) {
   if (children.size() != arity(kind))
      throw Error(ErrorKind::Internal, std::string(to_string(kind)) + " expects " + std::to_string(arity(kind)) + " children");
   for (const auto& c : children)
      if (!c) throw Error(ErrorKind::Internal, std::string(to_string(kind)) + " has a null child");
   auto n = std::make_shared<PlanNode>();
   n->kind = kind;
   n->payload = std::move(payload);
   n->children = std::move(children);
   return n;
}

} // namespace

bool plans_equal(const PlanPtr& a, const PlanPtr& b) {
   if (a == b) return true;
   if (!a || !b) return false;
   if (a->kind != b->kind || a->children.size() != b->children.size()) return false;
   if (!std::visit(PayloadEqual{}, a->payload, b->payload)) return false;
   for (std::size_t i = 0; i < a->children.size(); ++i)
      if (!plans_equal(a->children[i], b->children[i])) return false;
   return true;
}

PlanPtr with_children(const PlanNode& node, std::vector<PlanPtr> children) {
   auto copy = make(node.kind, node.payload, std::move(children));
   std::const_pointer_cast<PlanNode>(copy)->source_calls = node.source_calls;
   return copy;
}

namespace plan {

PlanPtr scan(std::string table, std::string alias) {
   if (alias.empty()) alias = table;
   return make(OpKind::Scan, ScanArgs{std::move(table), std::move(alias)}, {});
}
PlanPtr select(PlanPtr child, ExprPtr predicate) {
   return make(OpKind::Select, FilterArgs{std::move(predicate)}, {std::move(child)});
}
PlanPtr sem_select(PlanPtr child, SemSpec sem) {
   return make(OpKind::SemSelect, SemPredicateArgs{std::move(sem)}, {std::move(child)});
}
PlanPtr project(PlanPtr child, std::vector<ProjectItem> items) {
   return make(OpKind::Project, ProjectArgs{std::move(items)}, {std::move(child)});
}
PlanPtr sem_project(PlanPtr child, SemSpec sem, std::string alias) {
   return make(OpKind::SemProjectCol, SemColumnArgs{std::move(sem), std::move(alias)}, {std::move(child)});
}
PlanPtr product(PlanPtr left, PlanPtr right) {
   return make(OpKind::Product, std::monostate{}, {std::move(left), std::move(right)});
}
PlanPtr join(PlanPtr left, PlanPtr right, ExprPtr on) {
   return make(OpKind::Join, FilterArgs{std::move(on)}, {std::move(left), std::move(right)});
}
PlanPtr sem_join(PlanPtr left, PlanPtr right, SemSpec sem) {
   return make(OpKind::SemJoin, SemPredicateArgs{std::move(sem)}, {std::move(left), std::move(right)});
}
PlanPtr set_op(OpKind kind, PlanPtr left, PlanPtr right, std::string backend) {
   if (!is_set_operation(kind)) throw Error(ErrorKind::Internal, std::string(to_string(kind)) + " is not a set operation");
   Payload payload = std::monostate{};
   if (is_semantic(kind)) payload = EquivArgs{std::move(backend), std::nullopt};
   return make(kind, std::move(payload), {std::move(left), std::move(right)});
}
PlanPtr group(PlanPtr child, std::vector<ColumnName> keys) {
   return make(OpKind::Group, GroupArgs{std::move(keys)}, {std::move(child)});
}
PlanPtr sem_group(PlanPtr child, ColumnName attr, std::int64_t k, std::string backend) {
   if (k <= 0) throw BindingError("SEM_GROUP_BY requires k > 0, got " + std::to_string(k));
   return make(OpKind::SemGroup, SemGroupArgs{std::move(attr), k, std::move(backend)}, {std::move(child)});
}
PlanPtr aggregate(PlanPtr child, std::vector<ColumnName> keys, std::vector<AggItem> items) {
   bool semantic = std::any_of(items.begin(), items.end(), [](const AggItem& i) { return i.func == AggFunc::Semantic; });
   return make(semantic ? OpKind::SemAgg : OpKind::Agg, AggArgs{std::move(keys), std::move(items)}, {std::move(child)});
}
PlanPtr dedup(PlanPtr child) {
   return make(OpKind::Dedup, std::monostate{}, {std::move(child)});
}
PlanPtr sem_dedup(PlanPtr child, std::optional<ColumnName> attr, std::string backend) {
   return make(OpKind::SemDedup, EquivArgs{std::move(backend), std::move(attr)}, {std::move(child)});
}
PlanPtr sort(PlanPtr child, std::vector<SortKey> keys) {
   return make(OpKind::Sort, SortArgs{std::move(keys)}, {std::move(child)});
}
PlanPtr sem_sort(PlanPtr child, std::optional<ColumnName> attr, SemSpec sem) {
   return make(OpKind::SemSort, SemSortArgs{std::move(attr), std::move(sem)}, {std::move(child)});
}
PlanPtr topk(PlanPtr child, std::int64_t k) {
   if (k < 0) throw BindingError("LIMIT requires k >= 0, got " + std::to_string(k));
   return make(OpKind::TopK, LimitArgs{k}, {std::move(child)});
}
PlanPtr with_sources(PlanPtr node, std::vector<std::size_t> calls) {
   auto copy = std::make_shared<PlanNode>(*node);
   copy->source_calls = std::move(calls);
   return copy;
}

} // namespace plan

namespace {

const Schema& lookup_table(const Catalog& catalog, const std::string& name) {
   for (const auto& [key, schema] : catalog)
      if (util::iequals(key, name)) return schema;
   throw BindingError("unknown table '" + name + "'");
}

void check_placeholders(const SemSpec& sem, const Schema& schema) {
   for (const auto& ph : extract_placeholders(sem.prompt)) {
      if (!schema.try_resolve(ph.column.qualifier, ph.column.name))
         throw BindingError("placeholder {" + ph.column.to_string() + "} does not match any input column");
   }
}

ValueKind merge_kind(ValueKind a, ValueKind b) {
   return a == b ? a : ValueKind::Float;
}

} // namespace

Schema node_schema(const PlanNode& node, const std::vector<Schema>& inputs, const Catalog* catalog) {
   const PlanNode* p = &node;
   switch (p->kind) {
      case OpKind::Scan: {
         const auto& a = p->args<ScanArgs>();
         if (!catalog) throw Error(ErrorKind::Internal, "scan schema needs a catalog");
         return lookup_table(*catalog, a.table).requalified(a.alias);
      }
      case OpKind::Select: {
         const Schema& s = inputs.at(0);
         auto k = infer_kind(*p->args<FilterArgs>().predicate, s);
         if (k != ValueKind::Bool && k != ValueKind::Null) throw BindingError("WHERE predicate must be boolean");
         return s;
      }
      case OpKind::SemSelect: {
         const Schema& s = inputs.at(0);
         check_placeholders(p->args<SemPredicateArgs>().sem, s);
         return s;
      }
      case OpKind::Project: {
         const Schema& s = inputs.at(0);
         std::vector<Column> cols;
         for (const auto& item : p->args<ProjectArgs>().items) {
            auto kind = infer_kind(*item.expr, s);
            if (kind == ValueKind::Null) kind = ValueKind::Text;
            if (!item.alias.empty()) {
               cols.push_back({item.alias, kind, ""});
            } else if (item.expr->kind == Expr::Kind::Column) {
               auto idx = item.expr->column_index ? *item.expr->column_index : item.expr->column.resolve(s);
               cols.push_back({s[idx].name, kind, s[idx].qualifier});
            } else {
               cols.push_back({to_sql(*item.expr), kind, ""});
            }
         }
         return Schema(std::move(cols));
      }
      case OpKind::SemProjectCol: {
         const Schema& s = inputs.at(0);
         const auto& a = p->args<SemColumnArgs>();
         check_placeholders(a.sem, s);
         return s.with_column({a.alias, ValueKind::Text, ""});
      }
      case OpKind::Product:
         return Schema::concat(inputs.at(0), inputs.at(1));
      case OpKind::Join: {
         auto s = Schema::concat(inputs.at(0), inputs.at(1));
         auto k = infer_kind(*p->args<FilterArgs>().predicate, s);
         if (k != ValueKind::Bool && k != ValueKind::Null) throw BindingError("JOIN condition must be boolean");
         return s;
      }
      case OpKind::SemJoin: {
         auto s = Schema::concat(inputs.at(0), inputs.at(1));
         check_placeholders(p->args<SemPredicateArgs>().sem, s);
         return s;
      }
      case OpKind::SetDiff:
      case OpKind::BagDiff:
      case OpKind::SemSetDiff:
      case OpKind::SemBagDiff:
      case OpKind::SetUnion:
      case OpKind::BagUnion:
      case OpKind::SemSetUnion:
      case OpKind::SetIntersect:
      case OpKind::BagIntersect:
      case OpKind::SemSetIntersect:
      case OpKind::SemBagIntersect: {
         auto l = inputs.at(0);
         auto r = inputs.at(1);
         if (!check_union_compatible(l, r))
            throw BindingError(std::string(to_string(p->kind)) + ": inputs are not union-compatible");
         auto cols = l.columns();
         for (std::size_t i = 0; i < cols.size(); ++i) cols[i].kind = merge_kind(cols[i].kind, r[i].kind);
         return Schema(std::move(cols));
      }
      case OpKind::Group: {
         const Schema& s = inputs.at(0);
         for (const auto& key : p->args<GroupArgs>().keys) key.resolve(s);
         return s;
      }
      case OpKind::SemGroup: {
         const Schema& s = inputs.at(0);
         p->args<SemGroupArgs>().attr.resolve(s);
         return s.with_column({kGroupIdColumn, ValueKind::Int, ""});
      }
      case OpKind::Agg:
      case OpKind::SemAgg: {
         const Schema& s = inputs.at(0);
         const auto& a = p->args<AggArgs>();
         std::vector<Column> cols;
         for (const auto& key : a.keys) cols.push_back(s[key.resolve(s)]);
         for (const auto& item : a.items) {
            ValueKind kind = ValueKind::Text;
            std::optional<ValueKind> arg_kind;
            if (item.arg) arg_kind = s[item.arg->resolve(s)].kind;
            switch (item.func) {
               case AggFunc::CountStar:
               case AggFunc::Count: kind = ValueKind::Int; break;
               case AggFunc::Sum:
               case AggFunc::Avg:
                  if (!arg_kind || (*arg_kind != ValueKind::Int && *arg_kind != ValueKind::Float))
                     throw BindingError(std::string(to_string(item.func)) + " needs a numeric column");
                  kind = item.func == AggFunc::Avg ? ValueKind::Float : *arg_kind;
                  break;
               case AggFunc::Min:
               case AggFunc::Max:
                  if (!arg_kind) throw BindingError(std::string(to_string(item.func)) + " needs a column");
                  kind = *arg_kind;
                  break;
               case AggFunc::Semantic: kind = ValueKind::Text; break;
            }
            cols.push_back({item.output_name(), kind, ""});
         }
         return Schema(std::move(cols));
      }
      case OpKind::Dedup:
      case OpKind::TopK: return inputs.at(0);
      case OpKind::SemDedup: {
         const Schema& s = inputs.at(0);
         if (const auto& attr = p->args<EquivArgs>().attr) attr->resolve(s);
         return s;
      }
      case OpKind::Sort: {
         const Schema& s = inputs.at(0);
         for (const auto& key : p->args<SortArgs>().keys) infer_kind(*key.expr, s);
         return s;
      }
      case OpKind::SemSort: {
         const Schema& s = inputs.at(0);
         const auto& a = p->args<SemSortArgs>();
         if (a.attr) a.attr->resolve(s);
         check_placeholders(a.sem, s);
         return s;
      }
   }
   throw Error(ErrorKind::Internal, "unhandled operator in derive_schema");
}

Schema derive_schema(const PlanPtr& p, const Catalog& catalog) {
   std::vector<Schema> inputs;
   for (const auto& c : p->children) inputs.push_back(derive_schema(c, catalog));
   return node_schema(*p, inputs, &catalog);
}

namespace {

std::string one_line(const std::string& s) {
   std::string out;
   for (char c : s) {
      if (c == '\n') out += "\\n";
      else out += c;
   }
   return out;
}

std::string sem_label(const SemSpec& sem) {
   std::string out = util::sql_quote(one_line(sem.prompt));
   if (!sem.backend.empty()) out += " @" + sem.backend;
   return out;
}

std::string describe(const PlanNode& n) {
   std::string d = to_string(n.kind);
   std::visit(
      [&](const auto& a) {
         using T = std::decay_t<decltype(a)>;
         if constexpr (std::is_same_v<T, ScanArgs>) {
            d += " " + a.table;
            if (!util::iequals(a.alias, a.table)) d += " AS " + a.alias;
         } else if constexpr (std::is_same_v<T, FilterArgs>) {
            d += (n.kind == OpKind::Join ? " ON " : " ") + to_sql(*a.predicate);
         } else if constexpr (std::is_same_v<T, ProjectArgs>) {
            std::vector<std::string> parts;
            for (const auto& item : a.items) parts.push_back(to_sql(*item.expr) + (item.alias.empty() ? "" : " AS " + item.alias));
            d += " " + util::join(parts, ", ");
         } else if constexpr (std::is_same_v<T, SemPredicateArgs>) {
            d += " " + sem_label(a.sem);
         } else if constexpr (std::is_same_v<T, SemColumnArgs>) {
            d += " " + a.alias + " := " + sem_label(a.sem);
         } else if constexpr (std::is_same_v<T, EquivArgs>) {
            if (a.attr) d += " on " + a.attr->to_string();
            if (!a.backend.empty()) d += " @" + a.backend;
         } else if constexpr (std::is_same_v<T, GroupArgs>) {
            std::vector<std::string> parts;
            for (const auto& k : a.keys) parts.push_back(k.to_string());
            d += " " + util::join(parts, ", ");
         } else if constexpr (std::is_same_v<T, SemGroupArgs>) {
            d += " " + a.attr.to_string() + " k=" + std::to_string(a.k);
            if (!a.backend.empty()) d += " @" + a.backend;
         } else if constexpr (std::is_same_v<T, AggArgs>) {
            std::vector<std::string> keys, items;
            for (const auto& k : a.keys) keys.push_back(k.to_string());
            for (const auto& item : a.items) {
               std::string s;
               if (item.func == AggFunc::Semantic) {
                  s = "SEM_AGG(" + (item.arg ? item.arg->to_string() + ", " : std::string()) + sem_label(item.sem) + ")";
               } else if (item.func == AggFunc::CountStar) {
                  s = "COUNT(*)";
               } else {
                  s = std::string(to_string(item.func)) + "(" + (item.arg ? item.arg->to_string() : "") + ")";
               }
               items.push_back(s + " AS " + item.output_name());
            }
            if (!keys.empty()) d += " by " + util::join(keys, ", ") + ";";
            d += " " + util::join(items, ", ");
         } else if constexpr (std::is_same_v<T, SortArgs>) {
            std::vector<std::string> parts;
            for (const auto& k : a.keys) parts.push_back(to_sql(*k.expr) + (k.descending ? " DESC" : " ASC"));
            d += " " + util::join(parts, ", ");
         } else if constexpr (std::is_same_v<T, SemSortArgs>) {
            if (a.attr) d += " " + a.attr->to_string();
            d += " " + sem_label(a.sem) + " DESC";
         } else if constexpr (std::is_same_v<T, LimitArgs>) {
            d += " k=" + std::to_string(a.k);
         }
      },
      n.payload);
   return d;
}

void explain_into(const PlanPtr& p, int depth, std::ostringstream& out) {
   out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << describe(*p) << '\n';
   for (const auto& c : p->children) explain_into(c, depth + 1, out);
}

} // namespace

std::string explain(const PlanPtr& plan) {
   std::ostringstream out;
   explain_into(plan, 0, out);
   return out.str();
}

std::vector<std::pair<OpKind, std::string>> semantic_signature(const PlanPtr& plan) {
   std::vector<std::pair<OpKind, std::string>> out;
   walk(plan, [&](const PlanNode& n) {
      if (auto s = n.sem()) out.emplace_back(n.kind, s->prompt);
      if (n.kind == OpKind::SemAgg) {
         for (const auto& item : n.args<AggArgs>().items)
            if (item.func == AggFunc::Semantic) out.emplace_back(n.kind, item.sem.prompt);
      }
   });
   std::sort(out.begin(), out.end());
   return out;
}

} // namespace saber
