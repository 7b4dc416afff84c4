#pragma once

#include "saber/exec/database.hpp"
#include "saber/exec/executor.hpp"
#include "saber/ingest/ingest.hpp"
#include "saber/semkernel/mock_backend.hpp"
#include <cctype>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace saber::testing {

inline std::string source_path(const std::string& rel) {
   return std::string(SABER_SOURCE_DIR) + "/" + rel;
}

inline std::string slurp(const std::string& path) {
   std::ifstream in(path, std::ios::binary);
   std::stringstream ss;
   ss << in.rdbuf();
   return ss.str();
}

/// Single Text column named `col`, qualified with `table`.
inline Relation text_relation(const std::string& table, const std::string& col, const std::vector<std::string>& values) {
   std::vector<Tuple> rows;
   for (const auto& v : values) rows.push_back({Value(v)});
   return Relation(Schema({Column{col, ValueKind::Text, table}}), std::move(rows));
}

inline Relation make_relation(const std::string& table, std::vector<std::pair<std::string, ValueKind>> cols, std::vector<Tuple> rows) {
   std::vector<Column> c;
   for (auto& [name, kind] : cols) c.push_back(Column{name, kind, table});
   return Relation(Schema(std::move(c)), std::move(rows));
}

inline std::vector<std::string> column_text(const Relation& r, std::size_t col) {
   std::vector<std::string> out;
   for (const auto& row : r.rows()) out.push_back(row[col].to_string());
   return out;
}

/// A mock backend plus its log, with a resolver sending every tag to it.
struct MockHarness {
   std::shared_ptr<CallLog> log = std::make_shared<CallLog>();
   MockBackend backend{"mock", log};
   BackendResolver resolver() { return resolver_for(backend); }
};

inline Database movie_db() {
   Database db;
   db.add("movies", parse_table(fixture_movies_tsv(), FileFormat::Tsv, true, {}, "movies.tsv"));
   db.add("directors", parse_table(fixture_directors_tsv(), FileFormat::Tsv, true, {}, "directors.tsv"));
   return db;
}

inline Database product_db() {
   Database db;
   db.add("products", make_relation("products", {{"name", ValueKind::Text}, {"price", ValueKind::Int}},
                                    {{Value("Fuji Apple 3-pack"), Value(4)}, {Value("Banana bunch"), Value(1)}, {Value("Apple iPhone case"), Value(15)}}));
   return db;
}

inline const char* kAppleQuery = "SELECT name, price \n"
                                 "FROM products \n"
                                 "WHERE SEM_WHERE('{name} is related to apple', 'lotus') \n"
                                 "ORDER BY price DESC \n"
                                 "LIMIT 1;\n";

/// Words a director biography must contain one of to count as having
/// overcome challenges, and a plot to count as being about resilience.
inline const std::vector<std::string> kChallengeWords = {"refugee", "orphaned", "prisoner", "poverty"};
inline const std::vector<std::string> kResilienceWords = {"hope", "escape", "perseverance"};

inline bool has_word(const std::string& text, const std::vector<std::string>& words) {
   std::string token;
   auto flush = [&] {
      bool hit = false;
      for (const auto& w : words) hit = hit || token == w;
      token.clear();
      return hit;
   };
   for (char c : text + " ") {
      if (std::isalnum(static_cast<unsigned char>(c))) {
         token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      } else if (!token.empty() && flush()) {
         return true;
      }
   }
   return false;
}

} // namespace saber::testing
