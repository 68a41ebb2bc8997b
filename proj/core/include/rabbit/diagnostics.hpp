#ifndef RABBIT_DIAGNOSTICS_HPP
#define RABBIT_DIAGNOSTICS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rabbit {

/// Half-open byte range into the query source text.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Coarse classification used by exit codes and by the error-totality tests.
enum class ErrorKind {
    Syntax,       // lexing/parsing failures
    UnknownName,  // name does not resolve in the active scope
    Type,         // operand/argument type mismatch
    Cardinality,  // ONE/OPT/SEQ misuse (plural operand, aggregate on singular, ...)
    Arity,        // wrong number of combinator arguments
    Tag,          // missing or duplicate field/key tags
    Runtime,      // evaluation errors (division by zero, connect cycle)
    Schema,       // schema document validation
    Data,         // data document validation
    Io,           // file/config problems (CLI exit code 2)
};

const char* errorKindName(ErrorKind kind);

struct Diagnostic {
    ErrorKind kind = ErrorKind::Syntax;
    std::string message;
    SourceSpan span;

    /// `error[kind] at line:col — message` plus a source excerpt with a caret
    /// run when the offending source text is supplied.
    std::string render(const std::string& source) const;
    std::string renderJson(const std::string& source) const;
};

class QueryError : public std::runtime_error {
public:
    QueryError(ErrorKind kind, std::string message, SourceSpan span = {})
        : std::runtime_error(message), diagnostic_{kind, std::move(message), span} {}

    const Diagnostic& diagnostic() const { return diagnostic_; }
    ErrorKind kind() const { return diagnostic_.kind; }

private:
    Diagnostic diagnostic_;
};

/// 1-based line/column of a byte offset (columns count bytes).
struct LineCol {
    std::size_t line = 1;
    std::size_t col = 1;
};
LineCol locate(const std::string& source, std::size_t offset);

} // namespace rabbit

#endif
