#pragma once

#include <stdexcept>
#include <string>

namespace splitq {

/// Rejected argument (non-finite reward, invalid geometry, bad probability...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// State or action id outside the table / environment range.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// An update or solve produced a non-finite or singular result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment configuration is malformed; `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed data file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace splitq
