#include "saber/error.hpp"

namespace saber {

const char* to_string(ErrorKind kind) {
   switch (kind) {
      case ErrorKind::Config: return "config error";
      case ErrorKind::Syntax: return "syntax error";
      case ErrorKind::Binding: return "binding error";
      case ErrorKind::Backend: return "backend error";
      case ErrorKind::Io: return "I/O error";
      case ErrorKind::Internal: return "internal error";
   }
   return "error";
}

SyntaxError::SyntaxError(const std::string& message, SourcePos pos)
   : Error(ErrorKind::Syntax, std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message), pos_(pos) {}

} // namespace saber

namespace saber {

const char* BackendError::reason_name(Reason r) {
   switch (r) {
      case Reason::General: return "general";
      case Reason::EmptyTemplate: return "empty-template";
      case Reason::UndefinedSimilarity: return "undefined-similarity";
      case Reason::Timeout: return "timeout";
      case Reason::RetriesExhausted: return "retries-exhausted";
      case Reason::HttpStatus: return "http-status";
      case Reason::MalformedResponse: return "malformed-response";
      case Reason::Unparseable: return "unparseable";
      case Reason::Transport: return "transport";
   }
   return "?";
}

} // namespace saber
