#include "saber/engine/engine.hpp"
#include "saber/algebra/rules.hpp"
#include "saber/error.hpp"
#include "saber/semkernel/embedding_backend.hpp"
#include "saber/semkernel/mock_backend.hpp"
#include "saber/util/strings.hpp"
#include "json.hpp"
#include <cstdlib>
#include <filesystem>

namespace saber {

std::optional<OutputFormat> parse_output_format(std::string_view name) {
   if (util::iequals(name, "aligned") || util::iequals(name, "table")) return OutputFormat::Aligned;
   if (util::iequals(name, "csv")) return OutputFormat::Csv;
   if (util::iequals(name, "json")) return OutputFormat::Json;
   return std::nullopt;
}

std::string interpolate_env(std::string_view text) {
   std::string out;
   std::size_t i = 0;
   while (i < text.size()) {
      if (text[i] == '$' && i + 1 < text.size() && text[i + 1] == '{') {
         auto close = text.find('}', i + 2);
         if (close == std::string_view::npos) throw ConfigError("unterminated ${ in '" + std::string(text) + "'");
         std::string expr(text.substr(i + 2, close - i - 2));
         std::optional<std::string> fallback;
         if (auto sep = expr.find(":-"); sep != std::string::npos) {
            fallback = expr.substr(sep + 2);
            expr = expr.substr(0, sep);
         }
         const char* v = std::getenv(expr.c_str());
         if (v && *v) out += v;
         else if (fallback) out += *fallback;
         else throw ConfigError("environment variable " + expr + " is not set");
         i = close + 1;
      } else {
         out += text[i++];
      }
   }
   return out;
}

namespace {

using Json = nlohmann::json;

void interpolate_all(Json& j) {
   if (j.is_string()) j = interpolate_env(j.get<std::string>());
   else if (j.is_object() || j.is_array())
      for (auto& v : j) interpolate_all(v);
}

std::string resolve_path(const std::string& base, const std::string& p) {
   std::filesystem::path path(p);
   if (path.is_absolute() || base.empty()) return p;
   return (std::filesystem::path(base) / path).lexically_normal().string();
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
   if (!j.contains(key)) return fallback;
   return j.at(key).get<T>();
}

} // namespace

EngineConfig EngineConfig::parse(const std::string& json_text, const std::string& base_dir) {
   Json j;
   try {
      j = Json::parse(json_text);
   } catch (const Json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
   }
   if (!j.is_object()) throw ConfigError("config: expected a JSON object");
   interpolate_all(j);
   EngineConfig c;
   try {
      c.default_backend = get_or<std::string>(j, "default_backend", c.default_backend);
      c.threshold = get_or<double>(j, "threshold", c.threshold);
      c.optimize = get_or<bool>(j, "optimize", c.optimize);
      if (j.contains("output")) {
         auto f = parse_output_format(j.at("output").get<std::string>());
         if (!f) throw ConfigError("config: output must be aligned, csv or json");
         c.output = *f;
      }
      if (j.contains("backends")) {
         for (const auto& [name, b] : j.at("backends").items()) {
            BackendConfig bc;
            bc.name = name;
            bc.type = get_or<std::string>(b, "type", name);
            if (b.contains("rules_file")) bc.rules_file = resolve_path(base_dir, b.at("rules_file").get<std::string>());
            auto& l = bc.llm;
            l.base_url = get_or<std::string>(b, "base_url", l.base_url);
            l.model = get_or<std::string>(b, "model", l.model);
            l.api_key_env = get_or<std::string>(b, "api_key_env", l.api_key_env);
            l.temperature = get_or<double>(b, "temperature", l.temperature);
            l.max_retries = get_or<int>(b, "max_retries", l.max_retries);
            l.timeout_seconds = get_or<double>(b, "timeout_seconds", l.timeout_seconds);
            l.concurrency = get_or<std::size_t>(b, "concurrency", l.concurrency);
            l.backoff_seconds = get_or<double>(b, "backoff_seconds", l.backoff_seconds);
            l.equivalence = get_or<std::string>(b, "equivalence", l.equivalence);
            c.backends.push_back(std::move(bc));
         }
      }
      if (j.contains("tables")) {
         for (const auto& [name, t] : j.at("tables").items()) {
            LoadSpec spec;
            spec.path = resolve_path(base_dir, t.at("path").get<std::string>());
            if (t.contains("format")) {
               auto f = parse_file_format(t.at("format").get<std::string>());
               if (!f) throw ConfigError("config: table " + name + ": unknown format");
               spec.format = *f;
            } else if (auto f = format_from_path(spec.path)) {
               spec.format = *f;
            } else {
               throw ConfigError("config: table " + name + ": cannot tell the format of " + spec.path);
            }
            spec.header = get_or<bool>(t, "header", true);
            if (t.contains("kinds")) {
               for (const auto& [col, kind] : t.at("kinds").items()) {
                  auto k = parse_value_kind(kind.get<std::string>());
                  if (!k) throw ConfigError("config: table " + name + ": unknown kind for " + col);
                  spec.overrides[col] = *k;
               }
            }
            c.tables.emplace_back(name, std::move(spec));
         }
      }
   } catch (const Json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
   }
   c.validate();
   return c;
}

EngineConfig EngineConfig::load(const std::string& path) {
   return parse(read_file(path), std::filesystem::path(path).parent_path().string());
}

void EngineConfig::validate() const {
   if (!(threshold > 0 && threshold <= 1)) throw ConfigError("config: threshold must be in (0, 1]");
   for (const auto& b : backends) {
      if (b.type != "mock" && b.type != "embedding" && b.type != "llm")
         throw ConfigError("config: backend " + b.name + ": type must be mock, embedding or llm");
      if (b.type == "llm") b.llm.validate();
   }
   bool known = default_backend == "mock" || default_backend == "embedding";
   for (const auto& b : backends) known = known || b.name == default_backend;
   if (!known) throw ConfigError("config: default backend '" + default_backend + "' is not registered");
}

Engine::Engine(EngineConfig config) : config_(std::move(config)), log_(std::make_shared<CallLog>()) {
   config_.validate();
   wire_backends();
   for (const auto& [name, spec] : config_.tables) load_table(name, spec);
}

void Engine::wire_backends() {
   registry_ = BackendRegistry();
   double theta = config_.threshold;
   bool have_mock = false, have_embedding = false;
   for (const auto& b : config_.backends) {
      if (b.type == "mock") {
         auto rules = b.rules_file.empty() ? MockRuleSet::builtin() : MockRuleSet::load(b.rules_file);
         registry_.add(std::make_shared<MockBackend>(b.name, log_, theta, rules));
      } else if (b.type == "embedding") {
         registry_.add(std::make_shared<EmbeddingBackend>(b.name, log_, theta));
      } else {
         registry_.add(std::make_shared<LlmBackend>(b.name, log_, theta, b.llm));
      }
      have_mock = have_mock || b.name == "mock";
      have_embedding = have_embedding || b.name == "embedding";
   }
   if (!have_mock) registry_.add(std::make_shared<MockBackend>("mock", log_, theta));
   if (!have_embedding) registry_.add(std::make_shared<EmbeddingBackend>("embedding", log_, theta));
   set_default_backend(config_.default_backend);
}

void Engine::set_default_backend(const std::string& name) {
   if (!registry_.contains(name)) throw ConfigError("unknown backend '" + name + "' (registered: " + util::join(registry_.names(), ", ") + ")");
   registry_.set_default(name);
   config_.default_backend = name;
   // Rewrite targets and engine-native calls run on the selected backend
   // unless a backend with that exact name is configured.
   for (const auto& t : rewrite_targets()) {
      bool own = false;
      for (const auto& b : config_.backends) own = own || util::iequals(b.name, t.name);
      if (!own) registry_.alias(t.name, name);
   }
   registry_.alias(kNativeBackendTag, name);
}

void Engine::set_threshold(double theta) {
   if (!(theta > 0 && theta <= 1)) throw ConfigError("threshold must be in (0, 1]");
   config_.threshold = theta;
   for (const auto& n : registry_.names()) registry_.resolve(n).set_threshold(theta);
}

void Engine::load_table(const std::string& name, const LoadSpec& spec) {
   db_.put(name, load(spec));
}

sql::ParsedQuery Engine::parse(const std::string& sql) const {
   auto catalog = db_.catalog();
   return sql::parse_query(sql, &catalog);
}

PlanPtr Engine::optimize(const PlanPtr& plan) const {
   auto catalog = db_.catalog();
   PlanPtr p = lower_intersections(plan, catalog);
   if (config_.optimize) p = apply_rules(p, catalog, shipped_rules());
   return p;
}

QueryOutcome Engine::run(const std::string& sql) {
   QueryOutcome out;
   auto parsed = parse(sql);
   out.plan = parsed.plan;
   derive_schema(out.plan, db_.catalog());
   out.optimized = optimize(out.plan);
   out.report = eval(out.optimized, db_, resolver_for(registry_));
   return out;
}

std::string Engine::explain(const std::string& sql) const {
   auto parsed = parse(sql);
   derive_schema(parsed.plan, db_.catalog());
   auto opt = optimize(parsed.plan);
   std::string out = "-- logical plan\n" + saber::explain(parsed.plan);
   out += "-- after rewrite rules\n" + saber::explain(opt);
   return out;
}

RewriteOutcome Engine::rewrite(const std::string& sql, const std::string& target) const {
   const auto& t = rewrite_target(target);
   auto parsed = parse(sql);
   auto catalog = db_.catalog();
   return rewrite_for_backend(parsed, t, &catalog);
}

std::string render_relation(const Relation& r, OutputFormat format) {
   const auto& cols = r.schema().columns();
   switch (format) {
      case OutputFormat::Json: return relation_to_json(r);
      case OutputFormat::Csv: {
         std::string out;
         auto field = [](const std::string& s) {
            if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            return q + "\"";
         };
         for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + field(cols[c].name);
         out += "\n";
         for (const auto& row : r.rows()) {
            for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + (row[c].is_null() ? std::string() : field(row[c].to_string()));
            out += "\n";
         }
         return out;
      }
      case OutputFormat::Aligned: {
         std::vector<std::size_t> width(cols.size());
         std::vector<std::vector<std::string>> cells;
         for (std::size_t c = 0; c < cols.size(); ++c) width[c] = util::display_width(cols[c].name);
         for (const auto& row : r.rows()) {
            std::vector<std::string> line;
            for (std::size_t c = 0; c < row.size(); ++c) {
               std::string s = row[c].is_null() ? "NULL" : row[c].to_string();
               for (auto& ch : s)
                  if (ch == '\n' || ch == '\t') ch = ' ';
               width[c] = std::max(width[c], util::display_width(s));
               line.push_back(std::move(s));
            }
            cells.push_back(std::move(line));
         }
         auto pad = [](const std::string& s, std::size_t w, bool right, bool last) {
            std::string fill(w - util::display_width(s), ' ');
            if (right) return fill + s;
            return last ? s : s + fill;
         };
         std::string out;
         for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? " | " : " ") + pad(cols[c].name, width[c], false, c + 1 == cols.size());
         out += "\n";
         for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "-+-" : "-") + std::string(width[c], '-');
         out += "-\n";
         for (std::size_t i = 0; i < cells.size(); ++i) {
            for (std::size_t c = 0; c < cols.size(); ++c) {
               bool numeric = cols[c].kind == ValueKind::Int || cols[c].kind == ValueKind::Float;
               out += (c ? " | " : " ") + pad(cells[i][c], width[c], numeric, c + 1 == cols.size());
            }
            out += "\n";
         }
         out += "(" + std::to_string(r.size()) + (r.size() == 1 ? " row)\n" : " rows)\n");
         return out;
      }
   }
   return {};
}

} // namespace saber
