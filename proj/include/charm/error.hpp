#pragma once

#include <stdexcept>
#include <string>

namespace charm {

// Broad failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    Io,
    Config,
    Data,
    Checkpoint,
    Shape,
    Argument,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

// Raised by the delimited-text reader; carries the 1-based line number.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorKind::Data, "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

}  // namespace charm
