#include "saber/sqlfront/lexer.hpp"
#include "saber/util/strings.hpp"
#include <cctype>

namespace saber::sql {

bool Token::is_word(std::string_view w) const {
   return kind == TokenKind::Ident && util::iequals(text, w);
}

SourcePos position_of(std::string_view sql, std::size_t offset) {
   SourcePos p{offset, 1, 1};
   for (std::size_t i = 0; i < offset && i < sql.size(); ++i) {
      if (sql[i] == '\n') {
         ++p.line;
         p.column = 1;
      } else {
         ++p.column;
      }
   }
   return p;
}

namespace {

class Lexer {
   public:
   explicit Lexer(std::string_view sql) : sql_(sql) {}

   std::vector<Token> run() {
      std::vector<Token> out;
      for (;;) {
         skip_blank();
         Token t;
         t.begin = i_;
         t.line = line_;
         t.column = col_;
         if (i_ >= sql_.size()) {
            t.end = i_;
            out.push_back(t);
            return out;
         }
         char c = sql_[i_];
         if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            t.kind = TokenKind::Ident;
            while (i_ < sql_.size() && (std::isalnum(static_cast<unsigned char>(sql_[i_])) || sql_[i_] == '_')) advance();
            t.text = std::string(sql_.substr(t.begin, i_ - t.begin));
         } else if (c == '"') {
            t.kind = TokenKind::Ident;
            advance();
            while (i_ < sql_.size() && sql_[i_] != '"') t.text += advance();
            if (i_ >= sql_.size()) throw SyntaxError("unterminated quoted identifier", t.pos());
            advance();
         } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i_ + 1 < sql_.size() && std::isdigit(static_cast<unsigned char>(sql_[i_ + 1])))) {
            t.kind = TokenKind::Number;
            lex_number();
            t.text = std::string(sql_.substr(t.begin, i_ - t.begin));
         } else if (c == '\'') {
            t.kind = TokenKind::String;
            advance();
            for (;;) {
               if (i_ >= sql_.size()) throw SyntaxError("unterminated string literal", t.pos());
               char ch = advance();
               if (ch == '\'') {
                  if (i_ < sql_.size() && sql_[i_] == '\'') {
                     advance();
                     t.text += '\'';
                     continue;
                  }
                  break;
               }
               t.text += ch;
            }
         } else {
            t.kind = TokenKind::Symbol;
            static const char* two[] = {"<>", "!=", "<=", ">="};
            bool matched = false;
            for (const char* s : two) {
               if (sql_.substr(i_, 2) == s) {
                  advance();
                  advance();
                  t.text = s;
                  matched = true;
                  break;
               }
            }
            if (!matched) {
               static const std::string_view singles = "(),.*=<>+-/;";
               if (singles.find(c) == std::string_view::npos)
                  throw SyntaxError(std::string("unexpected character '") + c + "'", t.pos());
               t.text = std::string(1, advance());
            }
         }
         t.end = i_;
         out.push_back(std::move(t));
      }
   }

   private:
   char advance() {
      char c = sql_[i_++];
      if (c == '\n') {
         ++line_;
         col_ = 1;
      } else {
         ++col_;
      }
      return c;
   }

   void skip_blank() {
      for (;;) {
         while (i_ < sql_.size() && std::isspace(static_cast<unsigned char>(sql_[i_]))) advance();
         if (sql_.substr(i_, 2) == "--") {
            while (i_ < sql_.size() && sql_[i_] != '\n') advance();
            continue;
         }
         if (sql_.substr(i_, 2) == "/*") {
            SourcePos start{i_, line_, col_};
            advance();
            advance();
            while (i_ < sql_.size() && sql_.substr(i_, 2) != "*/") advance();
            if (i_ >= sql_.size()) throw SyntaxError("unterminated block comment", start);
            advance();
            advance();
            continue;
         }
         return;
      }
   }

   void lex_number() {
      auto digits = [&] {
         while (i_ < sql_.size() && std::isdigit(static_cast<unsigned char>(sql_[i_]))) advance();
      };
      digits();
      if (i_ < sql_.size() && sql_[i_] == '.') {
         advance();
         digits();
      }
      if (i_ < sql_.size() && (sql_[i_] == 'e' || sql_[i_] == 'E')) {
         std::size_t save = i_;
         std::size_t line = line_, col = col_;
         advance();
         if (i_ < sql_.size() && (sql_[i_] == '+' || sql_[i_] == '-')) advance();
         if (i_ < sql_.size() && std::isdigit(static_cast<unsigned char>(sql_[i_]))) {
            digits();
         } else {
            i_ = save;
            line_ = line;
            col_ = col;
         }
      }
   }

   std::string_view sql_;
   std::size_t i_ = 0;
   std::size_t line_ = 1;
   std::size_t col_ = 1;
};

} // namespace

std::vector<Token> tokenize(std::string_view sql) {
   return Lexer(sql).run();
}

} // namespace saber::sql
