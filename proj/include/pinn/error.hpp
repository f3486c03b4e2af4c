#pragma once

#include <stdexcept>
#include <string>

namespace pinn {

/// Dimension or block-partition mismatch between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Training produced a NaN or Inf loss.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A user whose rate row is identically zero cannot meet its QoS equality.
class DegenerateUserError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed structured text, with 1-based line/column of the offending byte.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed input that fails validation; `field()` names the culprit.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Filesystem failure (missing file, unwritable path, truncated read).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Persisted artifact has the wrong kind, version or layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pinn
