#include "saber/rewriter/rewriter.hpp"
#include "saber/algebra/rules.hpp"
#include "saber/error.hpp"
#include "saber/semkernel/prompt_template.hpp"
#include "saber/util/strings.hpp"
#include <algorithm>
#include <cctype>

namespace saber {

const char* to_string(SemOp op) {
   switch (op) {
      case SemOp::Select: return "σ^sem";
      case SemOp::Project: return "π^sem";
      case SemOp::Join: return "⋈^sem";
      case SemOp::Group: return "γ^sem";
      case SemOp::Aggregate: return "ξ^sem";
      case SemOp::Dedup: return "δ^sem";
      case SemOp::Sort: return "τ^sem";
      case SemOp::Difference: return "−^sem";
      case SemOp::Intersection: return "∩^sem";
   }
   return "?";
}

const char* sem_op_name(SemOp op) {
   switch (op) {
      case SemOp::Select: return "selection";
      case SemOp::Project: return "projection";
      case SemOp::Join: return "join";
      case SemOp::Group: return "grouping";
      case SemOp::Aggregate: return "aggregation";
      case SemOp::Dedup: return "deduplication";
      case SemOp::Sort: return "sorting";
      case SemOp::Difference: return "difference";
      case SemOp::Intersection: return "intersection";
   }
   return "?";
}

Support RewriteTarget::support(SemOp op) const {
   auto it = capabilities.find(op);
   return it == capabilities.end() ? Support::None : it->second;
}

const std::vector<RewriteTarget>& rewrite_targets() {
   static const std::vector<RewriteTarget> targets = [] {
      using enum SemOp;
      const auto F = Support::Full;
      std::map<SemOp, Support> rich = {{Select, F}, {Project, F}, {Join, F}, {Group, F}, {Aggregate, F}, {Dedup, F}, {Sort, F}};
      std::map<SemOp, Support> pz = {{Select, F}, {Project, F}, {Group, F}, {Aggregate, Support::Partial}, {Sort, F}};
      return std::vector<RewriteTarget>{
         {"lotus", PlaceholderStyle::Brace, "", "", rich},
         {"docetl", PlaceholderStyle::InputMustache, "Return True or False.", "Row: {{ input }}\n\n", rich},
         {"palimpzest", PlaceholderStyle::Plain, "", "", pz},
      };
   }();
   return targets;
}

const RewriteTarget& rewrite_target(std::string_view name) {
   for (const auto& t : rewrite_targets())
      if (util::iequals(t.name, name)) return t;
   throw ConfigError("unknown rewrite target '" + std::string(name) + "' (expected lotus, docetl or palimpzest)");
}

namespace {

std::string placeholder_text(const ColumnName& c, PlaceholderStyle style) {
   switch (style) {
      case PlaceholderStyle::Brace: return "{" + c.to_string() + "}";
      case PlaceholderStyle::InputMustache: return "{{ input." + c.to_string() + " }}";
      case PlaceholderStyle::Plain: return c.name;
   }
   return {};
}

std::string restyle(std::string_view tmpl, PlaceholderStyle style, const Schema* bound) {
   std::string out;
   std::size_t pos = 0;
   for (const auto& ph : extract_placeholders(tmpl)) {
      if (bound && !bound->try_resolve(ph.column.qualifier, ph.column.name))
         throw BindingError("placeholder {" + ph.column.to_string() + "} does not match any column in scope");
      out.append(tmpl.substr(pos, ph.begin - pos));
      out += placeholder_text(ph.column, style);
      pos = ph.end;
   }
   out.append(tmpl.substr(pos));
   return out;
}

std::optional<SemOp> op_of(sql::SemCallKind k) {
   using K = sql::SemCallKind;
   switch (k) {
      case K::Where: return SemOp::Select;
      case K::Select: return SemOp::Project;
      case K::Join: return SemOp::Join;
      case K::GroupBy: return SemOp::Group;
      case K::Agg: return SemOp::Aggregate;
      case K::Distinct: return SemOp::Dedup;
      case K::OrderBy: return SemOp::Sort;
      case K::ExceptAll: return SemOp::Difference;
      case K::IntersectAll: return SemOp::Intersection;
   }
   return std::nullopt;
}

bool composes_intersection(const RewriteTarget& t) {
   return t.support(SemOp::Project) == Support::Full && t.support(SemOp::Join) == Support::Full;
}

std::string phrase_for(const sql::SemCall& call, const RewriteTarget& target, const Schema* bound, const PromptCatalog& prompts) {
   if (const auto* p = prompts.find(sql::to_string(call.kind), call.template_text, target.name)) return *p;
   std::string out = restyle(call.template_text, target.style, bound);
   if (!target.row_context_block.empty() && extract_placeholders(call.template_text).empty()) out = target.row_context_block + out;
   bool is_predicate = call.kind == sql::SemCallKind::Where || call.kind == sql::SemCallKind::Join;
   if (is_predicate && !target.predicate_framing.empty() && !util::icontains(out, "true or false")) {
      while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
      if (!out.empty() && out.back() != '.' && out.back() != '?' && out.back() != '!') out += '.';
      out += " " + target.predicate_framing;
   }
   return out;
}

/// Input schema of the node each call became, for placeholder checks.
std::map<std::size_t, Schema> call_scopes(const PlanPtr& plan, const Catalog& catalog) {
   std::map<std::size_t, Schema> out;
   walk(plan, [&](const PlanNode& n) {
      if (n.source_calls.empty() || n.children.empty()) return;
      Schema s = derive_schema(n.child(0), catalog);
      if (n.kind == OpKind::SemJoin) s = Schema::concat(s, derive_schema(n.child(1), catalog));
      for (auto c : n.source_calls) out.emplace(c, s);
   });
   return out;
}

struct Edit {
   std::size_t begin;
   std::size_t end;
   std::string text;
};

} // namespace

std::string render_placeholders(std::string_view tmpl, PlaceholderStyle style, const Schema& bound) {
   return restyle(tmpl, style, &bound);
}

RewriteOutcome rewrite_for_backend(const sql::ParsedQuery& query, const RewriteTarget& target, const Catalog* catalog, const PromptCatalog& prompts) {
   RewriteOutcome out;
   std::map<std::size_t, Schema> scopes;
   if (catalog) scopes = call_scopes(query.plan, *catalog);

   std::vector<Edit> edits;
   for (std::size_t i = 0; i < query.sem_calls.size(); ++i) {
      const auto& call = query.sem_calls[i];
      auto op = *op_of(call.kind);
      std::string tag = target.name;
      bool restyle_template = true;
      Support s = target.support(op);
      if (s != Support::Full) {
         if (op == SemOp::Intersection && composes_intersection(target)) {
            out.fallbacks.push_back({op, "π^sem + ⋈^sem composition"});
         } else {
            out.fallbacks.push_back({op, s == Support::Partial ? "engine-native (partial support in target)" : "engine-native"});
            tag = kNativeBackendTag;
            restyle_template = false;
         }
      }
      if (restyle_template && call.template_span) {
         auto it = scopes.find(i);
         std::string phrase = phrase_for(call, target, it == scopes.end() ? nullptr : &it->second, prompts);
         edits.push_back({call.template_span->begin, call.template_span->end, util::sql_quote(phrase)});
      }
      if (call.backend_span) edits.push_back({call.backend_span->begin, call.backend_span->end, util::sql_quote(tag)});
      else edits.push_back({call.backend_insert, call.backend_insert, ", " + util::sql_quote(tag)});
   }
   std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) { return a.begin > b.begin || (a.begin == b.begin && a.end > b.end); });
   out.sql = query.source;
   for (const auto& e : edits) out.sql.replace(e.begin, e.end - e.begin, e.text);
   return out;
}

PlanPtr lower_intersections(const PlanPtr& plan, const Catalog& catalog) {
   std::vector<PlanPtr> kids;
   bool changed = false;
   for (const auto& c : plan->children) {
      kids.push_back(lower_intersections(c, catalog));
      changed = changed || kids.back() != c;
   }
   PlanPtr node = changed ? with_children(*plan, kids) : plan;
   if (node->kind != OpKind::SemBagIntersect && node->kind != OpKind::SemSetIntersect) return node;
   const std::string& tag = node->args<EquivArgs>().backend;
   const RewriteTarget* target = nullptr;
   for (const auto& t : rewrite_targets())
      if (util::iequals(t.name, tag)) target = &t;
   if (!target || target->support(SemOp::Intersection) != Support::None || !composes_intersection(*target)) return node;
   PlanPtr composed = compose_intersection(node->child(0), node->child(1), catalog, tag);
   if (node->kind == OpKind::SemSetIntersect) composed = plan::sem_dedup(composed, std::nullopt, tag);
   return plan::with_sources(composed, node->source_calls);
}

} // namespace saber
