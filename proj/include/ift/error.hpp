#pragma once

#include <stdexcept>
#include <string>

namespace ift {

// Malformed or invalid input data. Carries the offending 1-based data row and
// column label when the error can be localised.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
  DataError(const std::string& what, long row, std::string column)
      : std::runtime_error(what + " (row " + std::to_string(row) + ", column \"" + column + "\")"),
        row_(row),
        column_(std::move(column)) {}

  long row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  long row_ = -1;
  std::string column_;
};

// Numerical failure of a model fit (empty data, singular design, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The design matrix does not have full column rank. Callers building split
// candidates drop the candidate when they see this.
class RankDeficientError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace ift
