#include "saber/ingest/ingest.hpp"
#include "saber/error.hpp"
#include "saber/util/strings.hpp"
#include "json.hpp"
#include <filesystem>
#include <fstream>
#include <sstream>

namespace saber {

const char* to_string(FileFormat f) {
   switch (f) {
      case FileFormat::Csv: return "csv";
      case FileFormat::Tsv: return "tsv";
      case FileFormat::Jsonl: return "jsonl";
   }
   return "?";
}

std::optional<FileFormat> parse_file_format(std::string_view name) {
   if (util::iequals(name, "csv")) return FileFormat::Csv;
   if (util::iequals(name, "tsv")) return FileFormat::Tsv;
   if (util::iequals(name, "jsonl") || util::iequals(name, "ndjson")) return FileFormat::Jsonl;
   return std::nullopt;
}

std::optional<FileFormat> format_from_path(std::string_view path) {
   auto dot = path.rfind('.');
   if (dot == std::string_view::npos) return std::nullopt;
   return parse_file_format(path.substr(dot + 1));
}

std::string read_file(const std::string& path) {
   std::ifstream in(path, std::ios::binary);
   if (!in) throw IoError("cannot open '" + path + "'");
   std::ostringstream ss;
   ss << in.rdbuf();
   if (in.bad()) throw IoError("error reading '" + path + "'");
   return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
   std::ofstream out(path, std::ios::binary | std::ios::trunc);
   if (!out) throw IoError("cannot write '" + path + "'");
   out.write(content.data(), static_cast<std::streamsize>(content.size()));
   if (!out) throw IoError("error writing '" + path + "'");
}

namespace {

/// One delimited cell before typing. quoted cells are never NULL markers.
struct Cell {
   std::string text;
   bool quoted = false;
};

struct RawRow {
   std::vector<Cell> cells;
   std::size_t line = 0;
};

std::vector<RawRow> split_tsv(std::string_view text) {
   std::vector<RawRow> rows;
   std::size_t line_no = 0;
   std::size_t pos = 0;
   while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() : nl + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      RawRow row{{}, line_no};
      for (auto& field : util::split(line, '\t')) {
         Cell c;
         if (field == "\\N") {
            c.text = "\\N";
            row.cells.push_back(std::move(c));
            continue;
         }
         c.quoted = false;
         for (std::size_t i = 0; i < field.size(); ++i) {
            if (field[i] == '\\' && i + 1 < field.size()) {
               char e = field[++i];
               c.text += e == 't' ? '\t' : e == 'n' ? '\n' : e == 'r' ? '\r' : e;
               c.quoted = true; // escaped content is literal text
            } else {
               c.text += field[i];
            }
         }
         row.cells.push_back(std::move(c));
      }
      rows.push_back(std::move(row));
   }
   return rows;
}

std::vector<RawRow> split_csv(std::string_view text, const std::string& source) {
   std::vector<RawRow> rows;
   std::size_t i = 0, line = 1;
   while (i < text.size()) {
      RawRow row{{}, line};
      // Skip blank lines.
      if (text[i] == '\n' || (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n')) {
         i += text[i] == '\r' ? 2 : 1;
         ++line;
         continue;
      }
      for (;;) {
         Cell c;
         if (i < text.size() && text[i] == '"') {
            c.quoted = true;
            ++i;
            for (;;) {
               if (i >= text.size()) throw IoError(source + ":" + std::to_string(row.line) + ": unterminated quoted field");
               if (text[i] == '"') {
                  if (i + 1 < text.size() && text[i + 1] == '"') {
                     c.text += '"';
                     i += 2;
                     continue;
                  }
                  ++i;
                  break;
               }
               if (text[i] == '\n') ++line;
               c.text += text[i++];
            }
            if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
               throw IoError(source + ":" + std::to_string(line) + ": unexpected character after closing quote");
         } else {
            while (i < text.size() && text[i] != ',' && text[i] != '\n' && !(text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n'))
               c.text += text[i++];
         }
         row.cells.push_back(std::move(c));
         if (i < text.size() && text[i] == ',') {
            ++i;
            continue;
         }
         if (i < text.size() && text[i] == '\r') ++i;
         if (i < text.size() && text[i] == '\n') {
            ++i;
            ++line;
         }
         break;
      }
      rows.push_back(std::move(row));
   }
   return rows;
}

bool is_null_cell(const Cell& c) {
   return !c.quoted && c.text == "\\N";
}

/// Kind for a column of cells: Int, else Float, else Text.
ValueKind infer_kind(const std::vector<const Cell*>& cells) {
   bool any = false, all_int = true, all_num = true;
   for (const auto* c : cells) {
      if (is_null_cell(*c) || (!c->quoted && c->text.empty())) continue;
      any = true;
      if (all_int && !parse_as(c->text, ValueKind::Int)) all_int = false;
      if (all_num && !parse_as(c->text, ValueKind::Float)) all_num = false;
   }
   if (!any) return ValueKind::Text;
   if (all_int) return ValueKind::Int;
   if (all_num) return ValueKind::Float;
   return ValueKind::Text;
}

Value typed(const Cell& c, ValueKind kind, const std::string& where) {
   if (is_null_cell(c)) return Value::null();
   if (kind == ValueKind::Text) return Value(c.text);
   if (!c.quoted && c.text.empty()) return Value::null();
   auto v = parse_as(util::trim(c.text), kind);
   if (!v) throw IoError(where + ": '" + c.text + "' is not a valid " + to_string(kind));
   return *v;
}

Relation build(std::vector<std::string> names, std::vector<std::optional<ValueKind>> declared, const std::vector<RawRow>& rows,
               const std::map<std::string, ValueKind>& overrides, const std::string& source) {
   for (const auto& [name, kind] : overrides) {
      auto it = std::find_if(names.begin(), names.end(), [&](const std::string& n) { return util::iequals(n, name); });
      if (it == names.end()) throw ConfigError(source + ": kind override for unknown column '" + name + "'");
      declared[static_cast<std::size_t>(it - names.begin())] = kind;
   }
   for (const auto& r : rows) {
      if (r.cells.size() != names.size())
         throw IoError(source + ":" + std::to_string(r.line) + ": expected " + std::to_string(names.size()) + " fields, found " +
                       std::to_string(r.cells.size()));
   }
   std::vector<Column> cols;
   for (std::size_t c = 0; c < names.size(); ++c) {
      ValueKind k;
      if (declared[c]) {
         k = *declared[c];
      } else {
         std::vector<const Cell*> cells;
         for (const auto& r : rows) cells.push_back(&r.cells[c]);
         k = infer_kind(cells);
      }
      cols.push_back({names[c], k, ""});
   }
   std::vector<Tuple> out;
   for (const auto& r : rows) {
      Tuple t;
      for (std::size_t c = 0; c < names.size(); ++c)
         t.push_back(typed(r.cells[c], cols[c].kind, source + ":" + std::to_string(r.line) + ": column " + names[c]));
      out.push_back(std::move(t));
   }
   return Relation(Schema(std::move(cols)), std::move(out));
}

Relation parse_delimited(std::string_view text, FileFormat format, bool header, const std::map<std::string, ValueKind>& overrides,
                         const std::string& source) {
   auto rows = format == FileFormat::Tsv ? split_tsv(text) : split_csv(text, source);
   std::vector<std::string> names;
   std::vector<std::optional<ValueKind>> declared;
   if (header) {
      if (rows.empty()) throw IoError(source + ": missing header line");
      for (const auto& c : rows.front().cells) {
         std::string name = std::string(util::trim(c.text));
         std::optional<ValueKind> kind;
         auto colon = name.rfind(':');
         if (colon != std::string::npos) {
            if (auto k = parse_value_kind(name.substr(colon + 1))) {
               kind = k;
               name = name.substr(0, colon);
            }
         }
         if (name.empty()) throw IoError(source + ":" + std::to_string(rows.front().line) + ": empty column name");
         names.push_back(name);
         declared.push_back(kind);
      }
      rows.erase(rows.begin());
   } else {
      std::size_t n = rows.empty() ? 0 : rows.front().cells.size();
      for (std::size_t i = 0; i < n; ++i) names.push_back("c" + std::to_string(i + 1));
      declared.assign(n, std::nullopt);
   }
   return build(std::move(names), std::move(declared), rows, overrides, source);
}

Relation parse_jsonl(std::string_view text, const std::map<std::string, ValueKind>& overrides, const std::string& source) {
   std::vector<std::string> names;
   std::vector<std::map<std::string, nlohmann::json>> objects;
   std::vector<std::size_t> lines;
   std::size_t line_no = 0, pos = 0;
   while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() : nl + 1;
      ++line_no;
      if (util::trim(line).empty()) continue;
      nlohmann::ordered_json oj;
      try {
         oj = nlohmann::ordered_json::parse(line);
      } catch (const nlohmann::json::exception& e) {
         throw IoError(source + ":" + std::to_string(line_no) + ": " + e.what());
      }
      if (!oj.is_object()) throw IoError(source + ":" + std::to_string(line_no) + ": expected a JSON object");
      std::map<std::string, nlohmann::json> obj;
      for (const auto& [k, v] : oj.items()) {
         if (v.is_object() || v.is_array()) throw IoError(source + ":" + std::to_string(line_no) + ": field '" + k + "' is not a flat value");
         if (std::find(names.begin(), names.end(), k) == names.end()) names.push_back(k);
         obj[k] = nlohmann::json(v);
      }
      objects.push_back(std::move(obj));
      lines.push_back(line_no);
   }
   std::vector<std::optional<ValueKind>> kinds(names.size());
   for (const auto& [name, kind] : overrides) {
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw ConfigError(source + ": kind override for unknown column '" + name + "'");
      kinds[static_cast<std::size_t>(it - names.begin())] = kind;
   }
   std::vector<Column> cols;
   for (std::size_t c = 0; c < names.size(); ++c) {
      ValueKind k = ValueKind::Null;
      if (kinds[c]) {
         k = *kinds[c];
      } else {
         for (const auto& o : objects) {
            auto it = o.find(names[c]);
            if (it == o.end() || it->second.is_null()) continue;
            ValueKind vk = it->second.is_boolean() ? ValueKind::Bool
                           : it->second.is_number_integer() ? ValueKind::Int
                           : it->second.is_number() ? ValueKind::Float
                                                    : ValueKind::Text;
            if (k == ValueKind::Null) k = vk;
            else if (k != vk) k = (kinds_coercible(k, vk) && k != vk) ? ValueKind::Float : ValueKind::Text;
         }
         if (k == ValueKind::Null) k = ValueKind::Text;
      }
      cols.push_back({names[c], k, ""});
   }
   std::vector<Tuple> rows;
   for (std::size_t r = 0; r < objects.size(); ++r) {
      Tuple t;
      for (std::size_t c = 0; c < names.size(); ++c) {
         auto it = objects[r].find(names[c]);
         if (it == objects[r].end() || it->second.is_null()) {
            t.push_back(Value::null());
            continue;
         }
         const auto& v = it->second;
         Value raw = v.is_boolean() ? Value(v.get<bool>())
                     : v.is_number_integer() ? Value(v.get<std::int64_t>())
                     : v.is_number() ? Value(v.get<double>())
                                     : Value(v.get<std::string>());
         std::string where = source + ":" + std::to_string(lines[r]) + ": column " + names[c];
         if (raw.kind() == cols[c].kind || (raw.kind() == ValueKind::Int && cols[c].kind == ValueKind::Float)) {
            t.push_back(raw.kind() == cols[c].kind ? raw : Value(raw.as_float()));
         } else if (cols[c].kind == ValueKind::Text) {
            t.push_back(Value(raw.to_string()));
         } else {
            auto parsed = raw.kind() == ValueKind::Text ? parse_as(raw.as_text(), cols[c].kind) : std::nullopt;
            if (!parsed) throw IoError(where + ": value does not fit kind " + to_string(cols[c].kind));
            t.push_back(*parsed);
         }
      }
      rows.push_back(std::move(t));
   }
   return Relation(Schema(std::move(cols)), std::move(rows));
}

std::string tsv_escape(const std::string& s) {
   if (s == "\\N") return "\\\\N";
   std::string out;
   for (char c : s) {
      switch (c) {
         case '\\': out += "\\\\"; break;
         case '\t': out += "\\t"; break;
         case '\n': out += "\\n"; break;
         case '\r': out += "\\r"; break;
         default: out += c;
      }
   }
   return out;
}

std::string csv_field(const Value& v) {
   if (v.is_null()) return "\\N";
   std::string s = v.to_string();
   bool quote = v.kind() == ValueKind::Text &&
                (s.empty() || s == "\\N" || s.find_first_of(",\"\r\n") != std::string::npos || s.front() == ' ' || s.back() == ' ');
   if (!quote) return s;
   std::string out = "\"";
   for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
   return out + "\"";
}

} // namespace

Relation parse_table(std::string_view text, FileFormat format, bool header, const std::map<std::string, ValueKind>& overrides,
                     const std::string& source) {
   if (format == FileFormat::Jsonl) return parse_jsonl(text, overrides, source);
   return parse_delimited(text, format, header, overrides, source);
}

Relation load(const LoadSpec& spec) {
   return parse_table(read_file(spec.path), spec.format, spec.header, spec.overrides, spec.path);
}

std::string write_table(const Relation& r, FileFormat format) {
   const auto& cols = r.schema().columns();
   std::string out;
   if (format == FileFormat::Jsonl) {
      for (const auto& row : r.rows()) {
         nlohmann::ordered_json j = nlohmann::ordered_json::object();
         for (std::size_t c = 0; c < cols.size(); ++c) {
            const auto& v = row[c];
            switch (v.kind()) {
               case ValueKind::Null: j[cols[c].name] = nullptr; break;
               case ValueKind::Bool: j[cols[c].name] = v.as_bool(); break;
               case ValueKind::Int: j[cols[c].name] = v.as_int(); break;
               case ValueKind::Float: j[cols[c].name] = v.as_float(); break;
               case ValueKind::Text: j[cols[c].name] = v.as_text(); break;
            }
         }
         out += j.dump() + "\n";
      }
      return out;
   }
   char sep = format == FileFormat::Tsv ? '\t' : ',';
   for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out += sep;
      out += cols[c].name + ":" + to_string(cols[c].kind);
   }
   out += '\n';
   for (const auto& row : r.rows()) {
      for (std::size_t c = 0; c < row.size(); ++c) {
         if (c) out += sep;
         if (format == FileFormat::Tsv) out += row[c].is_null() ? std::string("\\N") : tsv_escape(row[c].to_string());
         else out += csv_field(row[c]);
      }
      out += '\n';
   }
   return out;
}

void build_fixture(const std::string& out_dir) {
   std::error_code ec;
   std::filesystem::create_directories(out_dir, ec);
   if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
   write_file((std::filesystem::path(out_dir) / "movies.tsv").string(), fixture_movies_tsv());
   write_file((std::filesystem::path(out_dir) / "directors.tsv").string(), fixture_directors_tsv());
}

} // namespace saber
