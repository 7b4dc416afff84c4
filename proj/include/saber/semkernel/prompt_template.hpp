#pragma once

#include "saber/algebra/expr.hpp"
#include <string>
#include <string_view>
#include <vector>

namespace saber {

/// Column placeholder inside a natural-language instruction. Two spellings
/// are recognised: "{col}" / "{alias.col}" and "{{ input.col }}" /
/// "{{ input.alias.col }}".
struct Placeholder {
   enum class Style { Brace, InputMustache };

   std::size_t begin = 0; ///< byte offset of the opening brace
   std::size_t end = 0;   ///< one past the closing brace
   ColumnName column;
   Style style = Style::Brace;
};

std::vector<Placeholder> extract_placeholders(std::string_view prompt);

/// The prompt with every placeholder removed.
std::string strip_placeholders(std::string_view prompt);

/// Indexes (schema order, unique) of the columns referenced by placeholders;
/// throws BindingError when a placeholder cannot be resolved.
std::vector<std::size_t> placeholder_columns(std::string_view prompt, const Schema& schema);

/// Context handed to a backend for one row: the placeholder columns when the
/// prompt has placeholders, otherwise the whole row.
std::string prompt_context(std::string_view prompt, const Schema& schema, const Tuple& row);

} // namespace saber
