#pragma once

#include "saber/relmodel/relation.hpp"
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace saber {

enum class FileFormat { Csv, Tsv, Jsonl };

const char* to_string(FileFormat f);
/// "csv", "tsv", "jsonl" (case-insensitive).
std::optional<FileFormat> parse_file_format(std::string_view name);
/// Format implied by a path's extension (.csv, .tsv, .jsonl, .ndjson).
std::optional<FileFormat> format_from_path(std::string_view path);

struct LoadSpec {
   std::string path;
   FileFormat format = FileFormat::Tsv;
   /// Delimited formats only; without a header columns are named c1, c2, ...
   bool header = true;
   std::map<std::string, ValueKind> overrides;
};

/// Reads a table file. Header cells may carry a kind ("rating:float");
/// other columns are inferred as Int, else Float, else Text over their
/// non-null cells. "\N" is NULL in delimited files, and an empty cell is NULL
/// in a numeric column. Throws IoError for unreadable files, arity mismatches
/// (with the 1-based line number) and cells that do not fit an override;
/// ConfigError when an override names a missing column.
Relation load(const LoadSpec& spec);

/// Same as load, from text already in memory. source names the input in
/// error messages.
Relation parse_table(std::string_view text, FileFormat format, bool header, const std::map<std::string, ValueKind>& overrides,
                     const std::string& source = "<input>");

/// Canonical text form: typed header ("name:kind"), "\N" for NULL. TSV
/// escapes backslash, tab, CR and LF; CSV quotes as needed. parse_table on
/// the result reproduces r exactly.
std::string write_table(const Relation& r, FileFormat format);

/// Writes movies.tsv (12 rows) and directors.tsv (10 rows) into out_dir,
/// creating it if needed. Output bytes are fixed.
void build_fixture(const std::string& out_dir);

/// The two fixture files' contents.
std::string fixture_movies_tsv();
std::string fixture_directors_tsv();

/// Reads a whole file; throws IoError.
std::string read_file(const std::string& path);
/// Writes a whole file; throws IoError.
void write_file(const std::string& path, std::string_view content);

} // namespace saber
