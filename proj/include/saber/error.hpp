#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace saber {

/// Error classes surfaced to callers. The numeric values double as CLI exit
/// codes and as C API status codes.
enum class ErrorKind {
   Config = 1,
   Syntax = 2,
   Binding = 3,
   Backend = 4,
   Io = 5,
   Internal = 6,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
   public:
   Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

   ErrorKind kind() const noexcept { return kind_; }

   private:
   ErrorKind kind_;
};

/// Position in SQL text (1-based line and column, 0-based byte offset).
struct SourcePos {
   std::size_t offset = 0;
   std::size_t line = 1;
   std::size_t column = 1;
};

class SyntaxError : public Error {
   public:
   SyntaxError(const std::string& message, SourcePos pos);

   const SourcePos& pos() const noexcept { return pos_; }

   private:
   SourcePos pos_;
};

/// Schema, name resolution, type and argument errors.
class BindingError : public Error {
   public:
   explicit BindingError(const std::string& message) : Error(ErrorKind::Binding, message) {}
};

/// Failures inside a semantic backend (including LLM transport).
class BackendError : public Error {
   public:
   enum class Reason {
      General,
      EmptyTemplate,
      UndefinedSimilarity,
      Timeout,
      RetriesExhausted,
      HttpStatus,
      MalformedResponse,
      Unparseable,
      Transport,
   };

   BackendError(Reason reason, const std::string& message, std::string raw = {})
      : Error(ErrorKind::Backend, message), reason_(reason), raw_(std::move(raw)) {}

   Reason reason() const noexcept { return reason_; }
   static const char* reason_name(Reason r);
   /// Raw model response, when the failure came from parsing one.
   const std::string& raw_response() const noexcept { return raw_; }

   private:
   Reason reason_;
   std::string raw_;
};

class IoError : public Error {
   public:
   explicit IoError(const std::string& message) : Error(ErrorKind::Io, message) {}
};

class ConfigError : public Error {
   public:
   explicit ConfigError(const std::string& message) : Error(ErrorKind::Config, message) {}
};

} // namespace saber
