#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace docdec {

using Token = std::string;
using Tokens = std::vector<Token>;

/// Base class for every error raised by the library. The CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed input line. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace docdec
