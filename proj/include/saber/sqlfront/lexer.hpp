#pragma once

#include "saber/error.hpp"
#include <string>
#include <string_view>
#include <vector>

namespace saber::sql {

enum class TokenKind { Ident, String, Number, Symbol, End };

struct Token {
   TokenKind kind = TokenKind::End;
   /// Identifier or symbol spelling, number text, or the unescaped string value.
   std::string text;
   std::size_t begin = 0; ///< byte offset of the first character
   std::size_t end = 0;   ///< one past the last character (closing quote included)
   std::size_t line = 1;
   std::size_t column = 1;

   SourcePos pos() const { return {begin, line, column}; }
   bool is_symbol(std::string_view s) const { return kind == TokenKind::Symbol && text == s; }
   /// Case-insensitive identifier/keyword match.
   bool is_word(std::string_view w) const;
};

/// Splits SQL into tokens. Skips whitespace, "--" line comments and "/* */"
/// block comments. Strings are single-quoted with '' as the escape and may
/// span lines. The result always ends with an End token. Throws SyntaxError
/// on an unterminated string or comment, or a stray character.
std::vector<Token> tokenize(std::string_view sql);

/// Position of a byte offset in sql.
SourcePos position_of(std::string_view sql, std::size_t offset);

} // namespace saber::sql
