#pragma once

#include <stdexcept>
#include <string>

namespace ahfl {

/// A configuration value is well-formed but violates a domain constraint.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A configuration file could not be parsed.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + " (" + field + "): " + what),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Training produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A run was too short to produce the requested statistic.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ahfl
