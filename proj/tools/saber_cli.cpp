// saber: run semantic SQL from files, -e strings or an interactive prompt.
#include "CLI11.hpp"
#include "saber/saber.h"
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace {

struct Options {
   std::string config;
   std::string backend;
   std::string rewrite_for;
   std::string output;
   std::string exec_sql;
   std::string file;
   std::string fixture_dir;
   std::vector<std::string> tables;
   double threshold = 0;
   bool explain = false;
   bool stats = false;
   bool no_optimize = false;
};

class Owned {
   public:
   ~Owned() { saber_string_free(p_); }
   char** out() { return &p_; }
   std::string str() const { return p_ ? p_ : ""; }

   private:
   char* p_ = nullptr;
};

int report(saber_engine* engine, saber_status st) {
   std::cerr << "error (" << saber_status_name(st) << "): " << saber_last_error(engine) << "\n";
   return static_cast<int>(st);
}

bool blank(const std::string& s) {
   return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

/// Splits a script at ';' outside quotes and comments. Each piece keeps its
/// terminating ';' so parse errors report positions within the statement.
std::vector<std::string> split_statements(const std::string& text) {
   std::vector<std::string> out;
   std::string cur;
   for (std::size_t i = 0; i < text.size(); ++i) {
      char c = text[i];
      cur += c;
      if (c == '\'' || c == '"') {
         for (++i; i < text.size(); ++i) {
            cur += text[i];
            if (text[i] == c) break;
         }
      } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
         for (++i; i < text.size() && text[i] != '\n'; ++i) cur += text[i];
         if (i < text.size()) cur += '\n';
      } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
         auto end = text.find("*/", i + 2);
         std::size_t stop = end == std::string::npos ? text.size() : end + 2;
         cur += text.substr(i + 1, stop - i - 1);
         i = stop - 1;
      } else if (c == ';') {
         out.push_back(cur);
         cur.clear();
      }
   }
   if (!blank(cur)) out.push_back(cur);
   return out;
}

saber_output output_format(saber_engine* engine, const std::string& name) {
   if (name.empty()) return saber_default_output(engine);
   if (name == "csv") return SABER_OUTPUT_CSV;
   if (name == "json") return SABER_OUTPUT_JSON;
   return SABER_OUTPUT_ALIGNED;
}

int run_statement(saber_engine* engine, const Options& opt, const std::string& sql) {
   if (!opt.rewrite_for.empty()) {
      Owned text;
      auto st = saber_rewrite(engine, sql.c_str(), opt.rewrite_for.c_str(), text.out());
      if (st != SABER_OK) return report(engine, st);
      std::cout << text.str();
      if (text.str().empty() || text.str().back() != '\n') std::cout << "\n";
      return 0;
   }
   if (opt.explain) {
      Owned text;
      auto st = saber_explain(engine, sql.c_str(), text.out());
      if (st != SABER_OK) return report(engine, st);
      std::cout << text.str();
      return 0;
   }
   saber_result* result = nullptr;
   auto st = saber_query(engine, sql.c_str(), &result);
   if (st != SABER_OK) return report(engine, st);
   Owned rendered;
   saber_result_render(result, output_format(engine, opt.output), rendered.out());
   std::cout << rendered.str();
   if (opt.stats) {
      Owned stats;
      saber_result_stats_json(result, stats.out());
      std::cout << "-- stats\n" << stats.str();
      if (stats.str().empty() || stats.str().back() != '\n') std::cout << "\n";
   }
   saber_result_free(result);
   return 0;
}

int run_script(saber_engine* engine, const Options& opt, const std::string& text) {
   auto statements = split_statements(text);
   int rc = 0;
   for (std::size_t i = 0; i < statements.size(); ++i) {
      if (i > 0) std::cout << "\n";
      rc = run_statement(engine, opt, statements[i]);
      if (rc != 0) return rc;
   }
   return rc;
}

int meta_command(saber_engine* engine, const std::string& line, bool& quit) {
   std::istringstream in(line);
   std::string cmd, arg;
   in >> cmd >> arg;
   if (cmd == "\\quit" || cmd == "\\q") {
      quit = true;
      return 0;
   }
   if (cmd == "\\tables") {
      Owned text;
      auto st = saber_tables(engine, text.out());
      if (st != SABER_OK) return report(engine, st);
      std::cout << text.str();
      return 0;
   }
   if (cmd == "\\schema") {
      if (arg.empty()) {
         std::cerr << "usage: \\schema <table>\n";
         return 1;
      }
      Owned text;
      auto st = saber_schema(engine, arg.c_str(), text.out());
      if (st != SABER_OK) return report(engine, st);
      std::cout << text.str();
      return 0;
   }
   std::cerr << "unknown command " << cmd << " (\\tables, \\schema <t>, \\quit)\n";
   return 1;
}

int repl(saber_engine* engine, const Options& opt) {
   bool tty = isatty(STDIN_FILENO);
   std::string buffer, line;
   int rc = 0;
   for (;;) {
      if (tty) std::cout << (buffer.empty() ? "saber> " : "  ...> ") << std::flush;
      if (!std::getline(std::cin, line)) break;
      auto first = line.find_first_not_of(" \t");
      if (buffer.empty() && first != std::string::npos && line[first] == '\\') {
         bool quit = false;
         rc = meta_command(engine, line.substr(first), quit);
         if (quit) return 0;
         continue;
      }
      buffer += line + "\n";
      auto pos = line.find_last_not_of(" \t\r");
      if (pos != std::string::npos && line[pos] == ';') {
         rc = run_script(engine, opt, buffer);
         buffer.clear();
      }
   }
   if (!blank(buffer)) rc = run_script(engine, opt, buffer);
   return rc;
}

} // namespace

int main(int argc, char** argv) {
   CLI::App app{"saber: SQL with semantic operators"};
   Options opt;
   app.add_option("file", opt.file, "SQL script to run");
   app.add_option("-e,--execute", opt.exec_sql, "SQL text to run");
   app.add_option("-c,--config", opt.config, "engine config (JSON)");
   app.add_option("-b,--backend", opt.backend, "default semantic backend");
   app.add_option("--threshold", opt.threshold, "similarity threshold in (0, 1]");
   app.add_option("-t,--table", opt.tables, "register a table as name=path");
   app.add_flag("--explain", opt.explain, "print the plan before and after rewriting");
   app.add_option("--rewrite-for", opt.rewrite_for, "print the query rewritten for lotus, docetl or palimpzest");
   app.add_flag("--stats", opt.stats, "append the execution report");
   app.add_option("-o,--output", opt.output, "aligned, csv or json")->check(CLI::IsMember({"aligned", "csv", "json"}));
   app.add_flag("--no-optimize", opt.no_optimize, "skip the rewrite rules");
   app.add_option("--build-fixture", opt.fixture_dir, "write the movie fixture into a directory and exit");
   app.add_flag_callback("--version", [] {
      std::cout << "saber 0.1.0\n";
      std::exit(0);
   }, "print the version and exit");
   try {
      app.parse(argc, argv);
   } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? 0 : 1;
   }

   if (!opt.fixture_dir.empty()) {
      Owned err;
      auto st = saber_build_fixture(opt.fixture_dir.c_str(), err.out());
      if (st != SABER_OK) {
         std::cerr << "error (" << saber_status_name(st) << "): " << err.str() << "\n";
         return static_cast<int>(st);
      }
      return 0;
   }

   saber_engine* engine = nullptr;
   {
      Owned err;
      auto st = saber_engine_new(opt.config.empty() ? nullptr : opt.config.c_str(), &engine, err.out());
      if (st != SABER_OK) {
         std::cerr << "error (" << saber_status_name(st) << "): " << err.str() << "\n";
         return static_cast<int>(st);
      }
   }
   struct Guard {
      saber_engine* e;
      ~Guard() { saber_engine_free(e); }
   } guard{engine};

   if (!opt.backend.empty())
      if (auto st = saber_set_backend(engine, opt.backend.c_str()); st != SABER_OK) return report(engine, st);
   if (opt.threshold != 0)
      if (auto st = saber_set_threshold(engine, opt.threshold); st != SABER_OK) return report(engine, st);
   if (opt.no_optimize) saber_set_optimize(engine, 0);
   for (const auto& t : opt.tables) {
      auto eq = t.find('=');
      if (eq == std::string::npos || eq == 0) {
         std::cerr << "error (config): --table expects name=path, got '" << t << "'\n";
         return SABER_ERR_CONFIG;
      }
      auto st = saber_load_table(engine, t.substr(0, eq).c_str(), t.substr(eq + 1).c_str(), nullptr, 1);
      if (st != SABER_OK) return report(engine, st);
   }

   if (!opt.exec_sql.empty()) return run_script(engine, opt, opt.exec_sql);
   if (!opt.file.empty()) {
      std::ifstream in(opt.file, std::ios::binary);
      if (!in) {
         std::cerr << "error (io): cannot read " << opt.file << "\n";
         return SABER_ERR_IO;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      return run_script(engine, opt, ss.str());
   }
   return repl(engine, opt);
}
