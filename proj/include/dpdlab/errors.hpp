#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpdlab {

/// Precondition violated by the caller (bad sizes, ranges, empty inputs).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed file or text (bad magic, bad version, syntax errors).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rank-deficient least-squares system. Carries the column indices whose
/// pivots collapsed during factorization.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(const std::string& what, std::vector<std::size_t> columns)
      : std::runtime_error(what), columns_(std::move(columns)) {}

  const std::vector<std::size_t>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::size_t> columns_;
};

/// Training produced a non-finite loss or otherwise diverged.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dpdlab
