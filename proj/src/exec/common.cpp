#include "common.hpp"
#include "saber/error.hpp"
#include "saber/semkernel/prompt_template.hpp"
#include <cmath>

namespace saber::exec_detail {

Value conventional_aggregate(const AggItem& item, const Schema& schema, const std::vector<const Tuple*>& rows) {
   if (item.func == AggFunc::CountStar) return Value(static_cast<std::int64_t>(rows.size()));
   std::size_t col = item.arg->resolve(schema);
   std::vector<const Value*> vals;
   for (const auto* r : rows)
      if (!(*r)[col].is_null()) vals.push_back(&(*r)[col]);
   switch (item.func) {
      case AggFunc::Count: return Value(static_cast<std::int64_t>(vals.size()));
      case AggFunc::Sum:
      case AggFunc::Avg: {
         if (vals.empty()) return Value::null();
         bool all_int = schema[col].kind == ValueKind::Int;
         if (all_int && item.func == AggFunc::Sum) {
            std::int64_t s = 0;
            for (const auto* v : vals) s += v->as_int();
            return Value(s);
         }
         double s = 0;
         for (const auto* v : vals) s += v->as_float();
         if (item.func == AggFunc::Avg) s /= static_cast<double>(vals.size());
         return Value(s);
      }
      case AggFunc::Min:
      case AggFunc::Max: {
         if (vals.empty()) return Value::null();
         const Value* best = vals[0];
         for (const auto* v : vals) {
            auto c = compare(*v, *best);
            if (item.func == AggFunc::Min ? c < 0 : c > 0) best = v;
         }
         return *best;
      }
      default: throw Error(ErrorKind::Internal, "not a conventional aggregate");
   }
}

std::vector<std::string> aggregate_inputs(const AggItem& item, const Schema& schema, const std::vector<const Tuple*>& rows) {
   std::vector<std::string> out;
   if (item.arg) {
      std::size_t col = item.arg->resolve(schema);
      for (const auto* r : rows)
         if (!(*r)[col].is_null()) out.push_back((*r)[col].to_string());
   } else {
      for (const auto* r : rows) out.push_back(prompt_context(item.sem.prompt, schema, *r));
   }
   return out;
}

std::string sort_context(const SemSortArgs& a, const Schema& schema, const Tuple& row) {
   if (a.attr) return render_row(schema, row, {a.attr->resolve(schema)});
   return prompt_context(a.sem.prompt, schema, row);
}

double group_similarity(const Embedding& a, const Embedding& b) {
   double na = 0, nb = 0;
   for (double x : a) na += x * x;
   for (double x : b) nb += x * x;
   if (na == 0 || nb == 0) return na == nb ? 1.0 : 0.0;
   return cosine(a, b);
}

bool sort_less(const std::vector<Value>& a, const std::vector<Value>& b, const std::vector<SortKey>& keys) {
   for (std::size_t i = 0; i < keys.size(); ++i) {
      auto c = sort_order(a[i], b[i]);
      if (c == 0) continue;
      return keys[i].descending ? c > 0 : c < 0;
   }
   return false;
}

} // namespace saber::exec_detail
