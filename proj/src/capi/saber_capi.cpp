#include "saber/saber.h"
#include "saber/engine/engine.hpp"
#include "saber/error.hpp"
#include "saber/ingest/ingest.hpp"
#include "saber/util/strings.hpp"
#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>

struct saber_engine {
   std::unique_ptr<saber::Engine> engine;
   std::string error;
   std::size_t error_line = 0;
   std::size_t error_column = 0;
};

struct saber_result {
   saber::QueryOutcome outcome;
   std::vector<std::vector<std::optional<std::string>>> cells;
};

namespace {

char* dup(const std::string& s) {
   char* p = static_cast<char*>(std::malloc(s.size() + 1));
   if (p) std::memcpy(p, s.c_str(), s.size() + 1);
   return p;
}

void set_err(char** err, const std::string& msg) {
   if (err) *err = dup(msg);
}

template <class F>
saber_status guarded(std::string& error, F&& f, std::size_t* line = nullptr, std::size_t* column = nullptr) {
   error.clear();
   if (line) *line = 0;
   if (column) *column = 0;
   try {
      f();
      return SABER_OK;
   } catch (const saber::SyntaxError& e) {
      error = e.what();
      if (line) *line = e.pos().line;
      if (column) *column = e.pos().column;
      return SABER_ERR_SYNTAX;
   } catch (const saber::Error& e) {
      error = e.what();
      return static_cast<saber_status>(e.kind());
   } catch (const std::exception& e) {
      error = std::string("internal error: ") + e.what();
      return SABER_ERR_INTERNAL;
   } catch (...) {
      error = "internal error";
      return SABER_ERR_INTERNAL;
   }
}

template <class F>
saber_status on_engine(saber_engine* e, F&& f) {
   if (!e) return SABER_ERR_CONFIG;
   return guarded(e->error, std::forward<F>(f), &e->error_line, &e->error_column);
}

saber_status make_engine(saber::EngineConfig config, saber_engine** out, char** err) {
   std::string msg;
   auto h = std::make_unique<saber_engine>();
   auto st = guarded(msg, [&] { h->engine = std::make_unique<saber::Engine>(std::move(config)); });
   if (st != SABER_OK) {
      set_err(err, msg);
      return st;
   }
   *out = h.release();
   return SABER_OK;
}

} // namespace

extern "C" {

saber_status saber_engine_new(const char* config_path, saber_engine** out, char** err) {
   if (!out) return SABER_ERR_CONFIG;
   *out = nullptr;
   if (err) *err = nullptr;
   saber::EngineConfig config;
   if (config_path) {
      std::string msg;
      auto st = guarded(msg, [&] { config = saber::EngineConfig::load(config_path); });
      if (st != SABER_OK) {
         set_err(err, msg);
         return st;
      }
   }
   return make_engine(std::move(config), out, err);
}

saber_status saber_engine_from_json(const char* json, const char* base_dir, saber_engine** out, char** err) {
   if (!out || !json) return SABER_ERR_CONFIG;
   *out = nullptr;
   if (err) *err = nullptr;
   saber::EngineConfig config;
   std::string msg;
   auto st = guarded(msg, [&] { config = saber::EngineConfig::parse(json, base_dir ? base_dir : "."); });
   if (st != SABER_OK) {
      set_err(err, msg);
      return st;
   }
   return make_engine(std::move(config), out, err);
}

void saber_engine_free(saber_engine* engine) {
   delete engine;
}

const char* saber_last_error(const saber_engine* engine) {
   return engine ? engine->error.c_str() : "null engine handle";
}

size_t saber_last_error_line(const saber_engine* engine) {
   return engine ? engine->error_line : 0;
}

size_t saber_last_error_column(const saber_engine* engine) {
   return engine ? engine->error_column : 0;
}

saber_status saber_set_backend(saber_engine* e, const char* name) {
   return on_engine(e, [&] { e->engine->set_default_backend(name ? name : ""); });
}

saber_status saber_set_threshold(saber_engine* e, double theta) {
   return on_engine(e, [&] { e->engine->set_threshold(theta); });
}

saber_status saber_set_optimize(saber_engine* e, int enabled) {
   return on_engine(e, [&] { e->engine->set_optimize(enabled != 0); });
}

saber_output saber_default_output(const saber_engine* e) {
   if (!e) return SABER_OUTPUT_ALIGNED;
   switch (e->engine->config().output) {
      case saber::OutputFormat::Csv: return SABER_OUTPUT_CSV;
      case saber::OutputFormat::Json: return SABER_OUTPUT_JSON;
      case saber::OutputFormat::Aligned: break;
   }
   return SABER_OUTPUT_ALIGNED;
}

saber_status saber_load_table(saber_engine* e, const char* name, const char* path, const char* format, int header) {
   return on_engine(e, [&] {
      if (!name || !path) throw saber::ConfigError("table name and path are required");
      saber::LoadSpec spec;
      spec.path = path;
      auto f = format ? saber::parse_file_format(format) : saber::format_from_path(path);
      if (!f) throw saber::ConfigError(std::string("cannot determine the format of ") + path);
      spec.format = *f;
      spec.header = header != 0;
      e->engine->load_table(name, spec);
   });
}

saber_status saber_build_fixture(const char* dir, char** err) {
   if (err) *err = nullptr;
   std::string msg;
   auto st = guarded(msg, [&] { saber::build_fixture(dir ? dir : "."); });
   if (st != SABER_OK) set_err(err, msg);
   return st;
}

saber_status saber_tables(saber_engine* e, char** out) {
   return on_engine(e, [&] {
      std::string s;
      for (const auto& n : e->engine->database().names())
         s += n + "\t" + std::to_string(e->engine->database().get(n).size()) + "\n";
      *out = dup(s);
   });
}

saber_status saber_schema(saber_engine* e, const char* table, char** out) {
   return on_engine(e, [&] {
      if (!table) throw saber::BindingError("table name is required");
      const auto& rel = e->engine->database().get(table);
      std::string s;
      for (const auto& c : rel.schema().columns()) s += c.name + "\t" + saber::to_string(c.kind) + "\n";
      *out = dup(s);
   });
}

saber_status saber_explain(saber_engine* e, const char* sql, char** out) {
   return on_engine(e, [&] { *out = dup(e->engine->explain(sql ? sql : "")); });
}

saber_status saber_rewrite(saber_engine* e, const char* sql, const char* target, char** out) {
   return on_engine(e, [&] {
      auto r = e->engine->rewrite(sql ? sql : "", target ? target : "");
      *out = dup(r.sql);
   });
}

saber_status saber_query(saber_engine* e, const char* sql, saber_result** out) {
   if (out) *out = nullptr;
   return on_engine(e, [&] {
      auto r = std::make_unique<saber_result>();
      r->outcome = e->engine->run(sql ? sql : "");
      for (const auto& row : r->outcome.report.result.rows()) {
         std::vector<std::optional<std::string>> line;
         for (const auto& v : row) line.push_back(v.is_null() ? std::nullopt : std::optional<std::string>(v.to_string()));
         r->cells.push_back(std::move(line));
      }
      *out = r.release();
   });
}

void saber_result_free(saber_result* result) {
   delete result;
}

size_t saber_result_rows(const saber_result* r) {
   return r ? r->outcome.report.result.size() : 0;
}

size_t saber_result_columns(const saber_result* r) {
   return r ? r->outcome.report.result.schema().arity() : 0;
}

const char* saber_result_column_name(const saber_result* r, size_t column) {
   if (!r || column >= saber_result_columns(r)) return nullptr;
   return r->outcome.report.result.schema()[column].name.c_str();
}

const char* saber_result_value(const saber_result* r, size_t row, size_t column) {
   if (!r || row >= r->cells.size() || column >= r->cells[row].size()) return nullptr;
   const auto& cell = r->cells[row][column];
   return cell ? cell->c_str() : nullptr;
}

saber_status saber_result_render(const saber_result* r, saber_output format, char** out) {
   if (!r || !out) return SABER_ERR_CONFIG;
   saber::OutputFormat f = format == SABER_OUTPUT_CSV    ? saber::OutputFormat::Csv
                           : format == SABER_OUTPUT_JSON ? saber::OutputFormat::Json
                                                         : saber::OutputFormat::Aligned;
   *out = dup(saber::render_relation(r->outcome.report.result, f));
   return SABER_OK;
}

saber_status saber_result_stats_json(const saber_result* r, char** out) {
   if (!r || !out) return SABER_ERR_CONFIG;
   *out = dup(r->outcome.report.to_json());
   return SABER_OK;
}

size_t saber_result_semantic_calls(const saber_result* r) {
   return r ? r->outcome.report.total_calls : 0;
}

size_t saber_call_count(const saber_engine* e) {
   return e ? e->engine->call_log().count() : 0;
}

saber_status saber_call_log_jsonl(const saber_engine* e, char** out) {
   if (!e || !out) return SABER_ERR_CONFIG;
   *out = dup(e->engine->call_log().to_jsonl());
   return SABER_OK;
}

void saber_call_log_reset(saber_engine* e) {
   if (e) e->engine->call_log().clear();
}

void saber_string_free(char* s) {
   std::free(s);
}

const char* saber_status_name(saber_status status) {
   switch (status) {
      case SABER_OK: return "ok";
      case SABER_ERR_CONFIG: return "config";
      case SABER_ERR_SYNTAX: return "syntax";
      case SABER_ERR_BINDING: return "binding";
      case SABER_ERR_BACKEND: return "backend";
      case SABER_ERR_IO: return "io";
      case SABER_ERR_INTERNAL: return "internal";
   }
   return "unknown";
}

} // extern "C"
