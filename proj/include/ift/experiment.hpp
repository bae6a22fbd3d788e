#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ift/classical.hpp"
#include "ift/evaluation.hpp"
#include "ift/grow.hpp"
#include "ift/simulation.hpp"

namespace ift {

enum class Method { Ift, LogisticClassical, LogisticExtended };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct MethodConfig {
  Method method = Method::Ift;
  Strategy strategy = Strategy::Udif;
  GrowOptions grow;            // alpha, permutations, min_node, seed, stopping, score
  std::string group_variable;  // classical logistic; empty selects the first variable
};

struct MethodRun {
  DetectionResult detection;  // at config.grow.alpha
  AlphaDetector detector;     // replays the decision at any alpha
  std::optional<GrowResult> growth;
  std::vector<ItemTestResult> tests;
};

// Runs one detector on one dataset. With `trace` the tree is grown in trace
// mode so that `detector` covers every alpha; the detection at the configured
// alpha is then read off the trail, which matches an ordinary run.
MethodRun run_method(const Dataset& data, const MethodConfig& config, bool trace = false);

struct ExperimentResult {
  ScenarioSpec scenario;
  MethodConfig config;
  std::vector<GroundTruth> truths;
  std::vector<MethodRun> runs;
  std::vector<Metrics> metrics;
  MetricsSummary summary;
  std::vector<RocPoint> roc;  // empty unless requested
  double auc = 0.0;
};

// Simulates every replication of `scenario` and applies the detector. Each
// replication's permutation streams are seeded from its data seed.
ExperimentResult run_experiment(const ScenarioSpec& scenario, const MethodConfig& config, bool with_roc = false,
                                Execution execution = Execution::Parallel);

}  // namespace ift
