#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ift/classical.hpp"
#include "ift/grow.hpp"
#include "ift/simulation.hpp"

namespace ift {

struct DetectionResult {
  std::size_t items = 0;
  std::size_t variables = 0;
  std::vector<std::uint8_t> delta_hat;  // items x variables
  std::vector<std::uint8_t> item_flags;
  // False for detectors that only decide per item (the logistic baselines);
  // their item x variable rates are then undefined.
  bool variable_level = true;

  DetectionResult() = default;
  DetectionResult(std::size_t items, std::size_t variables);
  bool at(std::size_t i, std::size_t j) const { return delta_hat[i * variables + j] != 0; }
  void flag(std::size_t i, std::size_t j);
};

struct Metrics {
  std::optional<double> tpr_item, fpr_item, tpr_item_variable, fpr_item_variable;
};

// Detection implied by grown trees: item i is flagged in variable j when one
// of its component trees splits on j.
DetectionResult detection_from_trees(const std::vector<ItemTree>& trees, std::size_t variables);

// Detection implied by per-item tests at level alpha.
DetectionResult detection_from_tests(const std::vector<ItemTestResult>& tests, std::size_t items,
                                     std::size_t variables, double alpha);

// Replays the stop-at-first-failure rule on a recorded trail at level alpha:
// steps are accepted while their p-value is below alpha / m.
DetectionResult detection_from_trail(const std::vector<TrailStep>& trail, std::size_t items, std::size_t variables,
                                     double alpha);

Metrics compute_metrics(const GroundTruth& truth, const DetectionResult& result);

struct RocPoint {
  double alpha = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

// Anything that yields a detection for a given significance level and is
// monotone in it.
struct AlphaDetector {
  enum class Kind { Tests, Trail } kind = Kind::Tests;
  std::size_t items = 0;
  std::size_t variables = 0;
  std::vector<ItemTestResult> tests;
  std::vector<TrailStep> trail;

  DetectionResult at(double alpha) const;
};

// Default alpha grid: dense near zero, uniform elsewhere, within (0, 1].
std::vector<double> default_alpha_grid();

// Mean (FPR_I, TPR_I) over replications at each alpha. Replications without
// DIF items (or without non-DIF items) are skipped for the undefined rate.
std::vector<RocPoint> roc_curve(std::span<const GroundTruth> truths, std::span<const AlphaDetector> detectors,
                                std::span<const double> alphas);

// Trapezoidal area under a ROC curve anchored at (0, 0) and (1, 1).
double roc_auc(std::span<const RocPoint> curve);

struct Summary {
  std::size_t count = 0;  // defined values only
  double mean = 0.0;
  double q1 = 0.0, median = 0.0, q3 = 0.0;
};

struct MetricsSummary {
  Summary tpr_item, fpr_item, tpr_item_variable, fpr_item_variable;
};

// Mean and quartiles (linear interpolation) over defined values.
Summary summarize(std::span<const double> values);
MetricsSummary aggregate(std::span<const Metrics> metrics);

}  // namespace ift
