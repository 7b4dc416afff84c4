// Reference evaluator. Every operator is written from its definition with
// plain loops; composite operators are built from their parts.

#include "common.hpp"
#include "saber/error.hpp"
#include "saber/exec/executor.hpp"
#include "saber/semkernel/prompt_template.hpp"
#include <algorithm>

namespace saber {

namespace {

using namespace exec_detail;
using Rows = std::vector<Tuple>;

class Oracle {
   public:
   Oracle(const Database& db, const BackendResolver& backends) : db_(db), backends_(backends), catalog_(db.catalog()) {}

   Relation run(const PlanPtr& p) {
      std::vector<Relation> in;
      for (const auto& c : p->children) in.push_back(run(c));
      std::vector<Schema> schemas;
      for (const auto& r : in) schemas.push_back(r.schema());
      Schema schema = node_schema(*p, schemas, &catalog_);
      return Relation(schema, rows_of(*p, in, schema));
   }

   private:
   SemanticBackend& be(const std::string& tag) { return backends_(tag); }

   static bool contains_identical(const Rows& rows, const Tuple& t) {
      for (const auto& r : rows)
         if (tuples_identical(r, t)) return true;
      return false;
   }

   static Rows dedup(const Rows& rows) {
      Rows out;
      for (const auto& r : rows)
         if (!contains_identical(out, r)) out.push_back(r);
      return out;
   }

   Rows sem_dedup(const Rows& rows, const Schema& schema, const std::optional<ColumnName>& attr, const std::string& tag) {
      auto text = [&](const Tuple& t) { return attr ? t[attr->resolve(schema)].to_string() : canonical_text(t); };
      Rows out;
      for (const auto& r : rows) {
         bool dup = false;
         for (const auto& k : out) {
            if (be(tag).equivalent(text(r), text(k))) {
               dup = true;
               break;
            }
         }
         if (!dup) out.push_back(r);
      }
      return out;
   }

   /// Rows of r that found a partner in s (keep_matched) or did not, where
   /// each s row can be used once and r is scanned in order.
   template <class Eq>
   static Rows greedy(const Rows& r, const Rows& s, bool keep_matched, Eq eq) {
      Rows out;
      std::vector<bool> used(s.size(), false);
      for (const auto& x : r) {
         bool found = false;
         for (std::size_t j = 0; j < s.size(); ++j) {
            if (!used[j] && eq(x, s[j])) {
               used[j] = true;
               found = true;
               break;
            }
         }
         if (found == keep_matched) out.push_back(x);
      }
      return out;
   }

   Rows sem_greedy(const Rows& r, const Rows& s, bool keep_matched, const std::string& tag) {
      return greedy(r, s, keep_matched, [&](const Tuple& a, const Tuple& b) { return be(tag).equivalent(canonical_text(a), canonical_text(b)); });
   }

   static Rows concat(const Rows& a, const Rows& b) {
      Rows out = a;
      out.insert(out.end(), b.begin(), b.end());
      return out;
   }

   Rows rows_of(const PlanNode& n, const std::vector<Relation>& in, const Schema& schema) {
      auto ident = [](const Tuple& a, const Tuple& b) { return tuples_identical(a, b); };
      Rows out;
      switch (n.kind) {
         case OpKind::Scan: return db_.get(n.args<ScanArgs>().table).rows();
         case OpKind::Select: {
            BoundExpr pred(n.args<FilterArgs>().predicate, in[0].schema());
            for (const auto& r : in[0].rows())
               if (pred.test(r)) out.push_back(r);
            return out;
         }
         case OpKind::SemSelect: {
            const auto& sem = n.args<SemPredicateArgs>().sem;
            for (const auto& r : in[0].rows())
               if (be(sem.backend).predicate(sem.prompt, prompt_context(sem.prompt, in[0].schema(), r))) out.push_back(r);
            return out;
         }
         case OpKind::Project: {
            for (const auto& r : in[0].rows()) {
               Tuple t;
               for (const auto& item : n.args<ProjectArgs>().items) t.push_back(BoundExpr(item.expr, in[0].schema()).evaluate(r));
               out.push_back(t);
            }
            return out;
         }
         case OpKind::SemProjectCol: {
            const auto& sem = n.args<SemColumnArgs>().sem;
            for (const auto& r : in[0].rows()) {
               Tuple t = r;
               t.emplace_back(be(sem.backend).map(sem.prompt, prompt_context(sem.prompt, in[0].schema(), r)));
               out.push_back(t);
            }
            return out;
         }
         case OpKind::Product:
         case OpKind::Join:
         case OpKind::SemJoin: {
            for (const auto& l : in[0].rows()) {
               for (const auto& r : in[1].rows()) {
                  Tuple t = tuple_concat(l, r);
                  bool keep = true;
                  if (n.kind == OpKind::Join) {
                     keep = BoundExpr(n.args<FilterArgs>().predicate, schema).test(t);
                  } else if (n.kind == OpKind::SemJoin) {
                     const auto& sem = n.args<SemPredicateArgs>().sem;
                     keep = be(sem.backend).predicate(sem.prompt, prompt_context(sem.prompt, schema, t));
                  }
                  if (keep) out.push_back(t);
               }
            }
            return out;
         }
         case OpKind::BagDiff: return greedy(in[0].rows(), in[1].rows(), false, ident);
         case OpKind::SetDiff: return dedup(greedy(in[0].rows(), in[1].rows(), false, ident));
         case OpKind::BagIntersect: return greedy(in[0].rows(), in[1].rows(), true, ident);
         case OpKind::SetIntersect: return dedup(greedy(in[0].rows(), in[1].rows(), true, ident));
         case OpKind::BagUnion: return concat(in[0].rows(), in[1].rows());
         case OpKind::SetUnion: return dedup(concat(in[0].rows(), in[1].rows()));
         case OpKind::SemBagDiff: return sem_greedy(in[0].rows(), in[1].rows(), false, n.args<EquivArgs>().backend);
         case OpKind::SemBagIntersect: return sem_greedy(in[0].rows(), in[1].rows(), true, n.args<EquivArgs>().backend);
         case OpKind::SemSetDiff: {
            const auto& tag = n.args<EquivArgs>().backend;
            return sem_dedup(sem_greedy(in[0].rows(), in[1].rows(), false, tag), schema, std::nullopt, tag);
         }
         case OpKind::SemSetIntersect: {
            const auto& tag = n.args<EquivArgs>().backend;
            return sem_dedup(sem_greedy(in[0].rows(), in[1].rows(), true, tag), schema, std::nullopt, tag);
         }
         case OpKind::SemSetUnion:
            return sem_dedup(concat(in[0].rows(), in[1].rows()), schema, std::nullopt, n.args<EquivArgs>().backend);
         case OpKind::Dedup: return dedup(in[0].rows());
         case OpKind::SemDedup: {
            const auto& a = n.args<EquivArgs>();
            return sem_dedup(in[0].rows(), schema, a.attr, a.backend);
         }
         case OpKind::Group: {
            const auto& s = in[0].schema();
            auto key = [&](const Tuple& t) {
               Tuple k;
               for (const auto& c : n.args<GroupArgs>().keys) k.push_back(t[c.resolve(s)]);
               return k;
            };
            Rows seen;
            for (const auto& r : in[0].rows()) {
               if (contains_identical(seen, key(r))) continue;
               seen.push_back(key(r));
               for (const auto& x : in[0].rows())
                  if (tuples_identical(key(x), key(r))) out.push_back(x);
            }
            return out;
         }
         case OpKind::Agg:
         case OpKind::SemAgg: {
            const auto& a = n.args<AggArgs>();
            const auto& s = in[0].schema();
            auto key = [&](const Tuple& t) {
               Tuple k;
               for (const auto& c : a.keys) k.push_back(t[c.resolve(s)]);
               return k;
            };
            Rows keys;
            if (a.keys.empty()) keys.emplace_back();
            for (const auto& r : in[0].rows())
               if (!a.keys.empty() && !contains_identical(keys, key(r))) keys.push_back(key(r));
            for (const auto& k : keys) {
               std::vector<const Tuple*> members;
               for (const auto& r : in[0].rows())
                  if (tuples_identical(key(r), k)) members.push_back(&r);
               Tuple t = k;
               for (const auto& item : a.items) {
                  if (item.func == AggFunc::Semantic) t.emplace_back(be(item.sem.backend).aggregate(item.sem.prompt, aggregate_inputs(item, s, members)));
                  else t.push_back(conventional_aggregate(item, s, members));
               }
               out.push_back(t);
            }
            return out;
         }
         case OpKind::SemGroup: return sem_group(n.args<SemGroupArgs>(), in[0]);
         case OpKind::Sort: return sort_rows(n.args<SortArgs>().keys, in[0]);
         case OpKind::SemSort: {
            const auto& a = n.args<SemSortArgs>();
            std::vector<std::pair<double, Tuple>> scored;
            for (const auto& r : in[0].rows()) scored.emplace_back(be(a.sem.backend).score(a.sem.prompt, sort_context(a, in[0].schema(), r)), r);
            // Insertion sort: a row moves in front only of strictly lower scores.
            for (std::size_t i = 1; i < scored.size(); ++i)
               for (std::size_t j = i; j > 0 && scored[j].first > scored[j - 1].first; --j) std::swap(scored[j], scored[j - 1]);
            for (auto& sr : scored) out.push_back(sr.second);
            return out;
         }
         case OpKind::TopK: {
            auto k = n.args<LimitArgs>().k;
            if (k < 0) throw BindingError("LIMIT must not be negative");
            for (const auto& r : in[0].rows()) {
               if (static_cast<std::int64_t>(out.size()) == k) break;
               out.push_back(r);
            }
            return out;
         }
      }
      return out;
   }

   static Rows sort_rows(const std::vector<SortKey>& keys, const Relation& in) {
      std::vector<std::pair<std::vector<Value>, Tuple>> dec;
      for (const auto& r : in.rows()) {
         std::vector<Value> vals;
         for (const auto& k : keys) vals.push_back(BoundExpr(k.expr, in.schema()).evaluate(r));
         dec.emplace_back(vals, r);
      }
      for (std::size_t i = 1; i < dec.size(); ++i)
         for (std::size_t j = i; j > 0 && sort_less(dec[j].first, dec[j - 1].first, keys); --j) std::swap(dec[j], dec[j - 1]);
      Rows out;
      for (auto& d : dec) out.push_back(d.second);
      return out;
   }

   Rows sem_group(const SemGroupArgs& a, const Relation& in) {
      if (a.k <= 0) throw BindingError("SEM_GROUP_BY: k must be positive");
      const auto& src = in.rows();
      if (src.empty()) return {};
      std::size_t col = a.attr.resolve(in.schema());
      std::vector<Embedding> emb;
      for (const auto& r : src) emb.push_back(be(a.backend).embed(r[col].is_null() ? std::string() : r[col].to_string()));
      std::vector<std::size_t> seeds{0};
      while (seeds.size() < static_cast<std::size_t>(a.k)) {
         // Row farthest from its nearest seed.
         std::optional<std::size_t> pick;
         double pick_sim = 0;
         for (std::size_t i = 0; i < src.size(); ++i) {
            double nearest = -2;
            for (auto s : seeds) nearest = std::max(nearest, group_similarity(emb[i], emb[s]));
            if (nearest >= 1.0) continue;
            if (!pick || nearest < pick_sim) {
               pick = i;
               pick_sim = nearest;
            }
         }
         if (!pick) break;
         seeds.push_back(*pick);
      }
      std::sort(seeds.begin(), seeds.end());
      Rows out;
      for (std::size_t g = 0; g < seeds.size(); ++g) {
         for (std::size_t i = 0; i < src.size(); ++i) {
            std::size_t nearest = 0;
            if (std::find(seeds.begin(), seeds.end(), i) != seeds.end()) {
               nearest = static_cast<std::size_t>(std::find(seeds.begin(), seeds.end(), i) - seeds.begin());
            } else {
               for (std::size_t s = 1; s < seeds.size(); ++s)
                  if (group_similarity(emb[i], emb[seeds[s]]) > group_similarity(emb[i], emb[seeds[nearest]])) nearest = s;
            }
            if (nearest != g) continue;
            Tuple t = src[i];
            t.emplace_back(static_cast<std::int64_t>(g));
            out.push_back(t);
         }
      }
      return out;
   }

   const Database& db_;
   const BackendResolver& backends_;
   Catalog catalog_;
};

} // namespace

Relation eval_oracle(const PlanPtr& plan, const Database& db, const BackendResolver& backends) {
   if (db.total_rows() > kOracleRowCap)
      throw BindingError("reference evaluator is limited to " + std::to_string(kOracleRowCap) + " input rows");
   return Oracle(db, backends).run(plan);
}

} // namespace saber
