#pragma once

#include <span>
#include <string>
#include <vector>

#include "ift/data.hpp"
#include "ift/glm.hpp"
#include "ift/split_search.hpp"

namespace ift {

// Logistic-regression DIF baselines. In extended mode the whole covariate
// vector enters linearly (and, for non-uniform DIF, through its interaction
// with the score); in classical mode one categorical variable is dummy coded
// against its first observed level.
enum class ClassicalMode { Groups, Extended };

struct ItemModelSpec {
  Strategy strategy = Strategy::Udif;
  ClassicalMode mode = ClassicalMode::Extended;
  std::string group_variable;  // classical mode only
  double alpha = 0.05;
  ScoreOptions score;
};

struct ItemTestResult {
  std::size_t item = 0;
  Strategy strategy = Strategy::Udif;
  LrTestResult lr;
  bool flagged = false;
  std::vector<std::string> parameter_names;  // full model
  std::vector<double> parameters;
  bool separation = false;
};

ItemTestResult fit_udif_extended(const Dataset& data, std::size_t item, double alpha = 0.05,
                                 const ScoreOptions& score = {});
ItemTestResult fit_dif_extended(const Dataset& data, std::size_t item, double alpha = 0.05,
                                const ScoreOptions& score = {});
ItemTestResult fit_nudif_extended(const Dataset& data, std::size_t item, double alpha = 0.05,
                                  const ScoreOptions& score = {});
ItemTestResult fit_classical_groups(const Dataset& data, std::size_t item, std::string_view group_variable,
                                    Strategy strategy, double alpha = 0.05, const ScoreOptions& score = {});

// Levels of a categorical variable in first-observed order.
std::vector<double> group_levels(std::span<const double> column);

// Tests each listed item with `config` (all items when `items` is
// empty). Results are ordered as `items`.
std::vector<ItemTestResult> run_classical_suite(const Dataset& data, const ItemModelSpec& config,
                                                std::span<const std::size_t> items = {},
                                                Execution execution = Execution::Parallel);

}  // namespace ift
