#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tablefill {

// Input file or record could not be parsed. Carries the 1-based line number
// when the failure is tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : std::runtime_error(what), line_(0) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad configuration: empty training data, dimension mismatch, vocab mismatch.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// select_top1 over an empty candidate set.
class EmptyCandidatesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tablefill
