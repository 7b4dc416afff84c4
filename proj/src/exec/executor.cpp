#include "saber/exec/executor.hpp"
#include "common.hpp"
#include "saber/error.hpp"
#include "saber/semkernel/prompt_template.hpp"
#include "json.hpp"
#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <numeric>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace saber {

BackendResolver resolver_for(const BackendRegistry& registry) {
   return [&registry](std::string_view tag) -> SemanticBackend& { return registry.resolve(tag); };
}

BackendResolver resolver_for(SemanticBackend& backend) {
   return [&backend](std::string_view) -> SemanticBackend& { return backend; };
}

namespace {

using namespace exec_detail;
using Clock = std::chrono::steady_clock;

class Executor {
   public:
   Executor(const Database& db, const BackendResolver& backends) : db_(db), backends_(backends), catalog_(db.catalog()) {}

   Relation run(const PlanPtr& p, std::size_t depth) {
      std::size_t id = stats_.size();
      stats_.push_back({id, depth, p->kind, 0, 0, 0});
      std::vector<Relation> inputs;
      for (const auto& c : p->children) inputs.push_back(run(c, depth + 1));

      auto start = Clock::now();
      std::size_t calls_before = calls_.load();
      Relation out;
      try {
         out = compute(*p, inputs);
      } catch (const BackendError& e) {
         throw BackendError(e.reason(), std::string(to_string(p->kind)) + " (node " + std::to_string(id) + "): " + e.what(), e.raw_response());
      }
      auto& s = stats_[id];
      s.rows_out = out.size();
      s.semantic_calls = calls_.load() - calls_before;
      s.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      return out;
   }

   std::vector<NodeStats> take_stats() { return std::move(stats_); }

   private:
   SemanticBackend& backend_for(const std::string& tag) { return backends_(tag); }

   /// Runs f(i) for i in [0, n) on up to max_concurrency threads. The first
   /// failure in index order is rethrown; work past it is abandoned.
   template <class R, class F>
   std::vector<R> fan_out(const SemanticBackend& be, std::size_t n, F f) {
      std::vector<R> results(n);
      std::size_t workers = std::min(be.max_concurrency(), n);
      if (workers <= 1) {
         for (std::size_t i = 0; i < n; ++i) results[i] = f(i);
         return results;
      }
      std::vector<std::exception_ptr> errors(n);
      std::atomic<std::size_t> next{0};
      std::atomic<bool> failed{false};
      auto work = [&] {
         for (;;) {
            if (failed.load()) return;
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
               results[i] = f(i);
            } catch (...) {
               errors[i] = std::current_exception();
               failed.store(true);
            }
         }
      };
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
      for (auto& e : errors)
         if (e) std::rethrow_exception(e);
      return results;
   }

   bool predicate(SemanticBackend& be, const std::string& prompt, const std::string& ctx) {
      ++calls_;
      return be.predicate(prompt, ctx);
   }
   bool equivalent(SemanticBackend& be, const std::string& a, const std::string& b) {
      ++calls_;
      return be.equivalent(a, b);
   }

   /// Greedy in-order matching of r rows against unconsumed s rows.
   template <class Match>
   std::vector<char> greedy_match(const Relation& r, const Relation& s, Match match) {
      std::vector<char> matched(r.size(), 0);
      std::vector<char> consumed(s.size(), 0);
      for (std::size_t i = 0; i < r.size(); ++i) {
         for (std::size_t j = 0; j < s.size(); ++j) {
            if (consumed[j] || !match(r.rows()[i], s.rows()[j])) continue;
            consumed[j] = 1;
            matched[i] = 1;
            break;
         }
      }
      return matched;
   }

   std::vector<char> identical_match(const Relation& r, const Relation& s) {
      std::unordered_map<Tuple, std::size_t, TupleHash, TupleIdentical> avail;
      for (const auto& row : s.rows()) ++avail[row];
      std::vector<char> matched(r.size(), 0);
      for (std::size_t i = 0; i < r.size(); ++i) {
         auto it = avail.find(r.rows()[i]);
         if (it != avail.end() && it->second > 0) {
            --it->second;
            matched[i] = 1;
         }
      }
      return matched;
   }

   static std::vector<Tuple> dedup_rows(std::vector<Tuple> rows) {
      std::unordered_set<Tuple, TupleHash, TupleIdentical> seen;
      std::vector<Tuple> out;
      for (auto& row : rows)
         if (seen.insert(row).second) out.push_back(std::move(row));
      return out;
   }

   /// Keeps rows not equivalent to any already kept row.
   std::vector<Tuple> sem_dedup_rows(SemanticBackend& be, const Schema& schema, const std::vector<Tuple>& rows,
                                     const std::optional<ColumnName>& attr) {
      std::optional<std::size_t> col;
      if (attr) col = attr->resolve(schema);
      std::vector<Tuple> out;
      std::vector<std::string> kept_text;
      for (const auto& row : rows) {
         std::string text = col ? row[*col].to_string() : canonical_text(row);
         bool dup = false;
         for (const auto& k : kept_text) {
            if (equivalent(be, text, k)) {
               dup = true;
               break;
            }
         }
         if (!dup) {
            out.push_back(row);
            kept_text.push_back(std::move(text));
         }
      }
      return out;
   }

   Relation compute(const PlanNode& n, const std::vector<Relation>& in) {
      std::vector<Schema> in_schemas;
      for (const auto& r : in) in_schemas.push_back(r.schema());
      Schema schema = node_schema(n, in_schemas, &catalog_);
      std::vector<Tuple> rows;

      switch (n.kind) {
         case OpKind::Scan: {
            rows = db_.get(n.args<ScanArgs>().table).rows();
            break;
         }
         case OpKind::Select: {
            BoundExpr pred(n.args<FilterArgs>().predicate, in[0].schema());
            for (const auto& row : in[0].rows())
               if (pred.test(row)) rows.push_back(row);
            break;
         }
         case OpKind::SemSelect: {
            const auto& sem = n.args<SemPredicateArgs>().sem;
            auto& be = backend_for(sem.backend);
            const auto& src = in[0].rows();
            auto keep = fan_out<char>(be, src.size(), [&](std::size_t i) {
               return static_cast<char>(predicate(be, sem.prompt, prompt_context(sem.prompt, in[0].schema(), src[i])));
            });
            for (std::size_t i = 0; i < src.size(); ++i)
               if (keep[i]) rows.push_back(src[i]);
            break;
         }
         case OpKind::Project: {
            std::vector<BoundExpr> exprs;
            for (const auto& item : n.args<ProjectArgs>().items) exprs.emplace_back(item.expr, in[0].schema());
            for (const auto& row : in[0].rows()) {
               Tuple t;
               for (const auto& e : exprs) t.push_back(e.evaluate(row));
               rows.push_back(std::move(t));
            }
            break;
         }
         case OpKind::SemProjectCol: {
            const auto& sem = n.args<SemColumnArgs>().sem;
            auto& be = backend_for(sem.backend);
            const auto& src = in[0].rows();
            auto values = fan_out<std::string>(be, src.size(), [&](std::size_t i) {
               ++calls_;
               return be.map(sem.prompt, prompt_context(sem.prompt, in[0].schema(), src[i]));
            });
            for (std::size_t i = 0; i < src.size(); ++i) {
               Tuple t = src[i];
               t.emplace_back(std::move(values[i]));
               rows.push_back(std::move(t));
            }
            break;
         }
         case OpKind::Product:
            for (const auto& l : in[0].rows())
               for (const auto& r : in[1].rows()) rows.push_back(tuple_concat(l, r));
            break;
         case OpKind::Join: {
            BoundExpr on(n.args<FilterArgs>().predicate, schema);
            for (const auto& l : in[0].rows()) {
               for (const auto& r : in[1].rows()) {
                  auto t = tuple_concat(l, r);
                  if (on.test(t)) rows.push_back(std::move(t));
               }
            }
            break;
         }
         case OpKind::SemJoin: {
            const auto& sem = n.args<SemPredicateArgs>().sem;
            auto& be = backend_for(sem.backend);
            std::size_t nr = in[1].size();
            std::size_t total = in[0].size() * nr;
            auto keep = fan_out<char>(be, total, [&](std::size_t i) {
               auto t = tuple_concat(in[0].rows()[i / nr], in[1].rows()[i % nr]);
               return static_cast<char>(predicate(be, sem.prompt, prompt_context(sem.prompt, schema, t)));
            });
            for (std::size_t i = 0; i < total; ++i)
               if (keep[i]) rows.push_back(tuple_concat(in[0].rows()[i / nr], in[1].rows()[i % nr]));
            break;
         }
         case OpKind::BagDiff:
         case OpKind::SetDiff: {
            auto m = identical_match(in[0], in[1]);
            for (std::size_t i = 0; i < in[0].size(); ++i)
               if (!m[i]) rows.push_back(in[0].rows()[i]);
            if (n.kind == OpKind::SetDiff) rows = dedup_rows(std::move(rows));
            break;
         }
         case OpKind::BagIntersect:
         case OpKind::SetIntersect: {
            auto m = identical_match(in[0], in[1]);
            for (std::size_t i = 0; i < in[0].size(); ++i)
               if (m[i]) rows.push_back(in[0].rows()[i]);
            if (n.kind == OpKind::SetIntersect) rows = dedup_rows(std::move(rows));
            break;
         }
         case OpKind::SemBagDiff:
         case OpKind::SemSetDiff:
         case OpKind::SemBagIntersect:
         case OpKind::SemSetIntersect: {
            auto& be = backend_for(n.args<EquivArgs>().backend);
            bool diff = n.kind == OpKind::SemBagDiff || n.kind == OpKind::SemSetDiff;
            bool set = n.kind == OpKind::SemSetDiff || n.kind == OpKind::SemSetIntersect;
            std::vector<std::string> rt, st;
            for (const auto& row : in[0].rows()) rt.push_back(canonical_text(row));
            for (const auto& row : in[1].rows()) st.push_back(canonical_text(row));
            // One pass: match against the right input, then (set variants)
            // against the rows kept so far.
            std::vector<char> consumed(st.size(), 0);
            std::vector<std::string> kept_text;
            for (std::size_t i = 0; i < rt.size(); ++i) {
               bool matched = false;
               for (std::size_t j = 0; j < st.size() && !matched; ++j) {
                  if (consumed[j] || !equivalent(be, rt[i], st[j])) continue;
                  consumed[j] = 1;
                  matched = true;
               }
               if (matched == diff) continue;
               if (set) {
                  bool dup = false;
                  for (const auto& k : kept_text) {
                     if (equivalent(be, rt[i], k)) {
                        dup = true;
                        break;
                     }
                  }
                  if (dup) continue;
                  kept_text.push_back(rt[i]);
               }
               rows.push_back(in[0].rows()[i]);
            }
            break;
         }
         case OpKind::BagUnion:
         case OpKind::SetUnion:
         case OpKind::SemSetUnion: {
            rows = in[0].rows();
            rows.insert(rows.end(), in[1].rows().begin(), in[1].rows().end());
            if (n.kind == OpKind::SetUnion) rows = dedup_rows(std::move(rows));
            if (n.kind == OpKind::SemSetUnion) rows = sem_dedup_rows(backend_for(n.args<EquivArgs>().backend), schema, rows, std::nullopt);
            break;
         }
         case OpKind::Group: {
            std::vector<std::size_t> cols;
            for (const auto& k : n.args<GroupArgs>().keys) cols.push_back(k.resolve(in[0].schema()));
            std::unordered_map<Tuple, std::size_t, TupleHash, TupleIdentical> group_of;
            std::vector<std::vector<const Tuple*>> groups;
            for (const auto& row : in[0].rows()) {
               Tuple key;
               for (auto c : cols) key.push_back(row[c]);
               auto [it, fresh] = group_of.try_emplace(std::move(key), groups.size());
               if (fresh) groups.emplace_back();
               groups[it->second].push_back(&row);
            }
            for (const auto& g : groups)
               for (const auto* r : g) rows.push_back(*r);
            break;
         }
         case OpKind::Agg:
         case OpKind::SemAgg: rows = aggregate(n, in[0]); break;
         case OpKind::SemGroup: rows = sem_group(n, in[0]); break;
         case OpKind::Dedup: rows = dedup_rows(in[0].rows()); break;
         case OpKind::SemDedup: {
            const auto& a = n.args<EquivArgs>();
            rows = sem_dedup_rows(backend_for(a.backend), schema, in[0].rows(), a.attr);
            break;
         }
         case OpKind::Sort: {
            const auto& keys = n.args<SortArgs>().keys;
            std::vector<BoundExpr> exprs;
            for (const auto& k : keys) exprs.emplace_back(k.expr, in[0].schema());
            std::vector<std::pair<std::vector<Value>, std::size_t>> decorated;
            for (std::size_t i = 0; i < in[0].size(); ++i) {
               std::vector<Value> vals;
               for (const auto& e : exprs) vals.push_back(e.evaluate(in[0].rows()[i]));
               decorated.emplace_back(std::move(vals), i);
            }
            std::stable_sort(decorated.begin(), decorated.end(), [&](const auto& a, const auto& b) { return sort_less(a.first, b.first, keys); });
            for (const auto& d : decorated) rows.push_back(in[0].rows()[d.second]);
            break;
         }
         case OpKind::SemSort: {
            const auto& a = n.args<SemSortArgs>();
            auto& be = backend_for(a.sem.backend);
            const auto& src = in[0].rows();
            auto scores = fan_out<double>(be, src.size(), [&](std::size_t i) {
               ++calls_;
               return be.score(a.sem.prompt, sort_context(a, in[0].schema(), src[i]));
            });
            std::vector<std::size_t> order(src.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
            for (auto i : order) rows.push_back(src[i]);
            break;
         }
         case OpKind::TopK: {
            auto k = n.args<LimitArgs>().k;
            if (k < 0) throw BindingError("LIMIT must not be negative");
            const auto& src = in[0].rows();
            rows.assign(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(k, src.size())));
            break;
         }
      }
      return Relation(std::move(schema), std::move(rows));
   }

   std::vector<Tuple> aggregate(const PlanNode& n, const Relation& in) {
      const auto& a = n.args<AggArgs>();
      const Schema& s = in.schema();
      std::vector<std::size_t> cols;
      for (const auto& k : a.keys) cols.push_back(k.resolve(s));
      std::vector<Tuple> keys;
      std::vector<std::vector<const Tuple*>> groups;
      if (cols.empty()) {
         keys.emplace_back();
         groups.emplace_back();
         for (const auto& row : in.rows()) groups[0].push_back(&row);
      } else {
         std::unordered_map<Tuple, std::size_t, TupleHash, TupleIdentical> group_of;
         for (const auto& row : in.rows()) {
            Tuple key;
            for (auto c : cols) key.push_back(row[c]);
            auto [it, fresh] = group_of.try_emplace(key, groups.size());
            if (fresh) {
               keys.push_back(std::move(key));
               groups.emplace_back();
            }
            groups[it->second].push_back(&row);
         }
      }
      std::vector<Tuple> out;
      for (std::size_t g = 0; g < groups.size(); ++g) {
         Tuple t = keys[g];
         for (const auto& item : a.items) {
            if (item.func == AggFunc::Semantic) {
               auto& be = backend_for(item.sem.backend);
               ++calls_;
               t.emplace_back(be.aggregate(item.sem.prompt, aggregate_inputs(item, s, groups[g])));
            } else {
               t.push_back(conventional_aggregate(item, s, groups[g]));
            }
         }
         out.push_back(std::move(t));
      }
      return out;
   }

   std::vector<Tuple> sem_group(const PlanNode& n, const Relation& in) {
      const auto& a = n.args<SemGroupArgs>();
      if (a.k <= 0) throw BindingError("SEM_GROUP_BY: k must be positive");
      const auto& src = in.rows();
      if (src.empty()) return {};
      std::size_t col = a.attr.resolve(in.schema());
      auto& be = backend_for(a.backend);
      auto emb = fan_out<Embedding>(be, src.size(), [&](std::size_t i) {
         ++calls_;
         return be.embed(src[i][col].is_null() ? std::string() : src[i][col].to_string());
      });

      // Farthest-point seeding: start at row 0, then repeatedly the row whose
      // best similarity to the current seeds is lowest (earliest on ties).
      std::vector<std::size_t> seeds{0};
      std::vector<double> best(src.size());
      for (std::size_t i = 0; i < src.size(); ++i) best[i] = group_similarity(emb[i], emb[0]);
      while (seeds.size() < static_cast<std::size_t>(a.k)) {
         std::size_t pick = src.size();
         for (std::size_t i = 0; i < src.size(); ++i)
            if (best[i] < 1.0 && (pick == src.size() || best[i] < best[pick])) pick = i;
         if (pick == src.size()) break; // every row coincides with a seed
         seeds.push_back(pick);
         for (std::size_t i = 0; i < src.size(); ++i) best[i] = std::max(best[i], group_similarity(emb[i], emb[pick]));
      }
      std::sort(seeds.begin(), seeds.end());

      std::vector<std::vector<std::size_t>> members(seeds.size());
      for (std::size_t i = 0; i < src.size(); ++i) {
         std::size_t g = 0;
         double g_sim = -2;
         for (std::size_t s = 0; s < seeds.size(); ++s) {
            double sim = seeds[s] == i ? 2.0 : group_similarity(emb[i], emb[seeds[s]]);
            if (sim > g_sim) {
               g = s;
               g_sim = sim;
            }
         }
         members[g].push_back(i);
      }
      std::vector<Tuple> out;
      for (std::size_t g = 0; g < members.size(); ++g) {
         for (auto i : members[g]) {
            Tuple t = src[i];
            t.emplace_back(static_cast<std::int64_t>(g));
            out.push_back(std::move(t));
         }
      }
      return out;
   }

   const Database& db_;
   const BackendResolver& backends_;
   Catalog catalog_;
   std::vector<NodeStats> stats_;
   std::atomic<std::size_t> calls_{0};
};

nlohmann::ordered_json value_json(const Value& v) {
   switch (v.kind()) {
      case ValueKind::Null: return nullptr;
      case ValueKind::Bool: return v.as_bool();
      case ValueKind::Int: return v.as_int();
      case ValueKind::Float: return v.as_float();
      case ValueKind::Text: return v.as_text();
   }
   return nullptr;
}

nlohmann::ordered_json relation_json(const Relation& r) {
   nlohmann::ordered_json j;
   j["columns"] = nlohmann::ordered_json::array();
   for (const auto& c : r.schema().columns()) j["columns"].push_back({{"name", c.qualified_name()}, {"kind", to_string(c.kind)}});
   j["rows"] = nlohmann::ordered_json::array();
   for (const auto& row : r.rows()) {
      auto jr = nlohmann::ordered_json::array();
      for (const auto& v : row) jr.push_back(value_json(v));
      j["rows"].push_back(std::move(jr));
   }
   return j;
}

} // namespace

ExecReport eval(const PlanPtr& plan, const Database& db, const BackendResolver& backends) {
   auto start = Clock::now();
   Executor ex(db, backends);
   ExecReport report;
   report.result = ex.run(plan, 0);
   report.nodes = ex.take_stats();
   for (const auto& s : report.nodes) report.total_calls += s.semantic_calls;
   report.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
   return report;
}

std::string relation_to_json(const Relation& r) {
   return relation_json(r).dump(2) + "\n";
}

std::string ExecReport::to_json() const {
   auto j = relation_json(result);
   j["nodes"] = nlohmann::ordered_json::array();
   for (const auto& s : nodes) {
      j["nodes"].push_back({{"id", s.id},
                            {"depth", s.depth},
                            {"op", to_string(s.kind)},
                            {"rows", s.rows_out},
                            {"semantic_calls", s.semantic_calls},
                            {"wall_ms", s.wall_ms}});
   }
   j["total_calls"] = total_calls;
   j["wall_ms"] = wall_ms;
   return j.dump(2) + "\n";
}

} // namespace saber
