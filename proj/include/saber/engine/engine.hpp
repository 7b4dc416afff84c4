#pragma once

#include "saber/algebra/plan.hpp"
#include "saber/exec/database.hpp"
#include "saber/exec/executor.hpp"
#include "saber/ingest/ingest.hpp"
#include "saber/rewriter/rewriter.hpp"
#include "saber/semkernel/backend.hpp"
#include "saber/semkernel/llm_backend.hpp"
#include "saber/sqlfront/parser.hpp"
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace saber {

enum class OutputFormat { Aligned, Csv, Json };
std::optional<OutputFormat> parse_output_format(std::string_view name);

struct BackendConfig {
   std::string name;
   std::string type; ///< mock, embedding, llm
   std::string rules_file; ///< mock: optional rule-set JSON
   LlmEndpointConfig llm;  ///< llm only
};

/// Engine settings. Loaded from JSON:
///   {
///     "default_backend": "mock",
///     "threshold": 0.8,
///     "output": "aligned" | "csv" | "json",
///     "optimize": true,
///     "backends": {"name": {"type": "mock" | "embedding" | "llm", ...}},
///     "tables": {"name": {"path": "...", "format": "tsv", "header": true,
///                         "kinds": {"col": "float"}}}
///   }
/// String values may contain ${VAR} or ${VAR:-fallback}. Relative table and
/// rule paths resolve against the config file's directory.
struct EngineConfig {
   std::string default_backend = "mock";
   double threshold = 0.8;
   OutputFormat output = OutputFormat::Aligned;
   bool optimize = true;
   std::vector<BackendConfig> backends;
   std::vector<std::pair<std::string, LoadSpec>> tables;

   /// Throws ConfigError.
   static EngineConfig parse(const std::string& json_text, const std::string& base_dir = ".");
   /// Throws IoError when the file cannot be read.
   static EngineConfig load(const std::string& path);
   void validate() const;
};

/// Expands ${VAR} and ${VAR:-fallback} from the environment. Throws
/// ConfigError for an unset variable without fallback.
std::string interpolate_env(std::string_view text);

struct QueryOutcome {
   PlanPtr plan;      ///< as parsed
   PlanPtr optimized; ///< after rules and lowering (== plan when disabled)
   ExecReport report;
};

/// Tables, backends and the query pipeline behind the CLI and the C API.
class Engine {
   public:
   explicit Engine(EngineConfig config = {});

   const EngineConfig& config() const { return config_; }
   Database& database() { return db_; }
   const Database& database() const { return db_; }
   BackendRegistry& backends() { return registry_; }
   CallLog& call_log() { return *log_; }

   /// Changes the backend used for untagged calls (and rewrite-target tags).
   void set_default_backend(const std::string& name);
   void set_threshold(double theta);
   void set_optimize(bool on) { config_.optimize = on; }

   void load_table(const std::string& name, const LoadSpec& spec);

   sql::ParsedQuery parse(const std::string& sql) const;
   /// Parsed plan after shipped rules (when enabled) and intersection lowering.
   PlanPtr optimize(const PlanPtr& plan) const;
   QueryOutcome run(const std::string& sql);
   /// Plan before and after optimization, as printed by --explain.
   std::string explain(const std::string& sql) const;
   RewriteOutcome rewrite(const std::string& sql, const std::string& target) const;

   private:
   void wire_backends();

   EngineConfig config_;
   Database db_;
   std::shared_ptr<CallLog> log_;
   BackendRegistry registry_;
};

std::string render_relation(const Relation& r, OutputFormat format);

} // namespace saber
