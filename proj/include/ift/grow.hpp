#pragma once

#include <cstdint>
#include <vector>

#include "ift/data.hpp"
#include "ift/split_search.hpp"
#include "ift/tree.hpp"

namespace ift {

struct GrowOptions {
  double alpha = 0.05;
  int permutations = 1000;
  std::size_t min_node = 30;
  std::uint64_t seed = 1;
  // Close only the tested item on a non-significant test instead of stopping
  // the whole procedure.
  bool per_item_stopping = false;
  // Commit every selected split regardless of its p-value and record the
  // trail; stops once every item carries a split or no candidate is left.
  // Used to trace ROC curves over alpha from a single run.
  bool trace = false;
  ScoreOptions score;
  Execution execution = Execution::Parallel;
};

struct PermutationTestResult {
  double observed = 0.0;
  std::vector<double> permuted;
  double p_value = 1.0;
  int permutations = 0;
  double local_alpha = 0.0;

  bool significant() const { return p_value < local_alpha; }
};

// Add-one permutation p-value: (#{permuted >= observed} + 1) / (R + 1).
double permutation_p_value(double observed, const std::vector<double>& permuted);

// Permutation test of the maximally selected statistic of `variable` for one
// item in its current state. The covariate column is permuted over all
// persons while the item's existing partition stays fixed.
PermutationTestResult permutation_test(const ItemContext& ctx, const ItemModel& model, std::size_t item,
                                       std::size_t variable, std::span<const double> x, Strategy strategy,
                                       std::size_t min_node, int permutations, std::uint64_t key, double local_alpha,
                                       Execution execution = Execution::Parallel);

// Stream key of the permutation test run at `iteration` for (item, variable).
std::uint64_t permutation_key(std::uint64_t seed, int iteration, std::size_t item, std::size_t variable);

struct TrailStep {
  int iteration = 0;
  std::size_t item = 0;
  std::size_t variable = 0;
  int cell = 0;
  Component component = Component::Intercept;
  double threshold = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
  bool accepted = false;
  double joint_log_likelihood = 0.0;  // sum over items after this step
};

struct GrowResult {
  Strategy strategy = Strategy::Udif;
  std::vector<ItemTree> trees;
  std::vector<TrailStep> trail;
  double local_alpha = 0.0;
  std::size_t variables = 0;
  double initial_log_likelihood = 0.0;
};

GrowResult grow(const Dataset& data, Strategy strategy, const GrowOptions& options);

inline GrowResult grow_uniform(const Dataset& data, const GrowOptions& options) {
  return grow(data, Strategy::Udif, options);
}
inline GrowResult grow_dif(const Dataset& data, const GrowOptions& options) {
  return grow(data, Strategy::Dif, options);
}
inline GrowResult grow_nudif(const Dataset& data, const GrowOptions& options) {
  return grow(data, Strategy::Nudif, options);
}

}  // namespace ift
