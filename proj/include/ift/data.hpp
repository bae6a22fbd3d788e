#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ift {

// Binary item responses, persons x items, stored row-major.
class ResponseMatrix {
 public:
  ResponseMatrix() = default;
  // Validates shape, entry domain and uniqueness of item names.
  ResponseMatrix(std::vector<std::string> item_names, std::size_t persons, std::vector<std::uint8_t> values);

  std::size_t persons() const { return persons_; }
  std::size_t items() const { return item_names_.size(); }
  const std::vector<std::string>& item_names() const { return item_names_; }

  std::uint8_t at(std::size_t person, std::size_t item) const { return values_[person * items() + item]; }
  std::span<const std::uint8_t> row(std::size_t person) const {
    return {values_.data() + person * items(), items()};
  }
  std::vector<std::uint8_t> column(std::size_t item) const;
  const std::vector<std::uint8_t>& values() const { return values_; }

  bool operator==(const ResponseMatrix&) const = default;

 private:
  std::vector<std::string> item_names_;
  std::size_t persons_ = 0;
  std::vector<std::uint8_t> values_;
};

enum class Scale { Binary, Ordinal, Continuous };

std::string_view to_string(Scale scale);
Scale parse_scale(std::string_view text);

struct VariableSpec {
  std::string name;
  Scale scale = Scale::Continuous;

  bool operator==(const VariableSpec&) const = default;
};

// Person covariates that may induce DIF. Stored column-wise since every
// consumer (split search, design matrices) walks one variable at a time.
class CovariateTable {
 public:
  CovariateTable() = default;
  CovariateTable(std::vector<VariableSpec> variables, std::vector<std::vector<double>> columns);

  std::size_t persons() const { return persons_; }
  std::size_t variables() const { return variables_.size(); }
  const std::vector<VariableSpec>& specs() const { return variables_; }
  const VariableSpec& spec(std::size_t j) const { return variables_[j]; }
  std::span<const double> column(std::size_t j) const { return columns_[j]; }
  double at(std::size_t person, std::size_t j) const { return columns_[j][person]; }
  std::vector<double> row(std::size_t person) const;
  // Index of the variable with the given name; throws DataError if absent.
  std::size_t index_of(std::string_view name) const;

  bool operator==(const CovariateTable&) const = default;

 private:
  std::vector<VariableSpec> variables_;
  std::vector<std::vector<double>> columns_;
  std::size_t persons_ = 0;
};

using ScoreVector = std::vector<double>;

// Raw sum score per person over all items.
ScoreVector compute_test_scores(const ResponseMatrix& responses);

// Options for the score used as ability proxy when fitting item `i`.
struct ScoreOptions {
  bool rest_score = false;   // exclude the studied item from its own score
  bool standardize = false;  // divide by the number of items
};

ScoreVector item_score(const ResponseMatrix& responses, const ScoreVector& total, std::size_t item,
                       const ScoreOptions& options);

// Responses, covariates and the total score, checked for matching person count.
struct Dataset {
  ResponseMatrix responses;
  CovariateTable covariates;
  ScoreVector scores;

  Dataset() = default;
  Dataset(ResponseMatrix r, CovariateTable c);
};

ResponseMatrix load_responses(const std::filesystem::path& path);
void save_responses(const ResponseMatrix& responses, const std::filesystem::path& path);

std::vector<VariableSpec> load_schema(const std::filesystem::path& path);
void save_schema(const std::vector<VariableSpec>& variables, const std::filesystem::path& path);

CovariateTable load_covariates(const std::filesystem::path& path, const std::filesystem::path& schema);
void save_covariates(const CovariateTable& covariates, const std::filesystem::path& path);

}  // namespace ift
