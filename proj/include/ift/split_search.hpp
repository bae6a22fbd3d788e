#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ift/data.hpp"
#include "ift/glm.hpp"
#include "ift/tree.hpp"

namespace ift {

enum class Strategy { Udif, Dif, Nudif };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view text);

// How data-parallel kernels run. Serial is the reference path; both produce
// bit-identical results.
enum class Execution { Serial, Parallel };

// Response and score of one item, with the score coded as level indices so
// the partition models can be fitted on grouped counts.
struct ItemContext {
  std::vector<std::uint8_t> y;
  std::vector<int> level;
  std::vector<double> levels;
};

ItemContext make_item_context(const Dataset& data, std::size_t item, const ScoreOptions& options);

// Current fitted partition model of one item. Cell indices match the cells of
// the item's ComponentTree pair.
struct ItemModel {
  std::vector<int> intercept_cell;
  std::vector<int> slope_cell;
  int intercept_cells = 1;
  int slope_cells = 1;
  std::vector<double> coefficients;  // intercept cells, then slope cells
  double log_likelihood = 0.0;
  bool separation = false;
};

// Constant model eta = beta_0 + S * beta.
ItemModel initial_item_model(const ItemContext& ctx);

CellTable tabulate(const ItemContext& ctx, const ItemModel& model);

// Refit `model` on its current partition (warm-started from its coefficients).
void refit(const ItemContext& ctx, ItemModel& model);

struct SplitCandidate {
  std::size_t item = 0;
  std::size_t variable = 0;
  int cell = 0;
  Component component = Component::Intercept;
  double threshold = 0.0;
  double statistic = -1.0;
  std::size_t left = 0;
  std::size_t right = 0;
  bool separation = false;

  bool valid() const { return statistic >= 0.0; }
};

// Strict ordering used to pick the winning candidate: larger statistic first,
// ties broken by item, variable, threshold, component, cell.
bool better_candidate(const SplitCandidate& a, const SplitCandidate& b);

// Components searched under each strategy.
std::vector<Component> strategy_components(Strategy strategy);

struct SplitEvaluation {
  double statistic = 0.0;
  int df = 1;
  PartitionFit fit;         // candidate model
  PartitionFit restricted;  // simultaneous splits only: intercept-split model
  bool rank_deficient = false;
};

// Refits the item's model with `cell` of `component` split at `threshold` on
// covariate column `x`. Intercept and slope splits are tested against the
// current model; simultaneous splits against the model that splits only the
// intercept at the same point.
SplitEvaluation evaluate_split(const ItemContext& ctx, const ItemModel& model, std::span<const double> x, int cell,
                               Component component, double threshold);

// Maximally selected statistic for one item and variable: the best candidate
// over all terminal nodes, thresholds and strategy components. Returns an
// invalid candidate when the variable has no admissible threshold.
SplitCandidate best_split_for_variable(const ItemContext& ctx, const ItemModel& model, std::size_t item,
                                       std::size_t variable, std::span<const double> x, Strategy strategy,
                                       std::size_t min_node, std::vector<SplitCandidate>* all = nullptr);

std::optional<double> maximally_selected_stat(const ItemContext& ctx, const ItemModel& model, std::size_t item,
                                              std::size_t variable, std::span<const double> x, Strategy strategy,
                                              std::size_t min_node);

// Best candidate per (item, variable) for the listed items; result is laid
// out item-major, `items.size() * covariates.variables()` entries.
std::vector<SplitCandidate> scan_items(std::span<const ItemContext> contexts, std::span<const ItemModel> models,
                                       std::span<const std::size_t> items, const CovariateTable& covariates,
                                       Strategy strategy, std::size_t min_node, Execution execution);

// Maximally selected statistics of `variable` under R random permutations of
// its column. Replicate r draws its permutation from derive_key(key, r).
std::vector<double> permutation_statistics(const ItemContext& ctx, const ItemModel& model, std::size_t item,
                                           std::size_t variable, std::span<const double> x, Strategy strategy,
                                           std::size_t min_node, int permutations, std::uint64_t key,
                                           Execution execution);

// Applies a candidate to the model's partition and refits.
void apply_split(const ItemContext& ctx, ItemModel& model, std::span<const double> x, const SplitCandidate& split);

}  // namespace ift
