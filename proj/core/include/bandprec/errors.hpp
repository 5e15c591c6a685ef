#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bandprec {

/// An argument outside the mathematical domain of an operation
/// (negative variance, lambda = 0 where weights are undefined, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative method failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) +
                           " iterations)"),
        iterations_(iterations) {}

  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

/// Malformed CSV/JSON input. Row and column are 1-based; 0 means unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t col)
      : std::runtime_error(what + " at row " + std::to_string(row) +
                           ", column " + std::to_string(col)),
        row_(row),
        col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Configuration that violates documented parameter ranges.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> fields)
      : std::invalid_argument(join(fields)), fields_(std::move(fields)) {}

  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  static std::string join(const std::vector<std::string>& fields) {
    std::string out = "invalid configuration:";
    for (const auto& f : fields) out += " [" + f + "]";
    return out;
  }

  std::vector<std::string> fields_;
};

}  // namespace bandprec
