#include "ift/grow.hpp"

#include <numeric>
#include <stdexcept>

#include "ift/rng.hpp"

namespace ift {

namespace {

constexpr std::uint64_t kPermutationStream = 0x7065726dULL;  // "perm"

void sync_tree(ItemTree& tree, const ItemModel& model) {
  std::vector<std::size_t> icount(model.intercept_cells, 0), scount(model.slope_cells, 0);
  for (auto c : model.intercept_cell) ++icount[c];
  for (auto c : model.slope_cell) ++scount[c];
  for (int c = 0; c < model.intercept_cells; ++c) {
    tree.intercept.set_coefficient(c, model.coefficients[c]);
    tree.intercept.set_persons(c, icount[c]);
  }
  for (int c = 0; c < model.slope_cells; ++c) {
    tree.slope.set_coefficient(c, model.coefficients[model.intercept_cells + c]);
    tree.slope.set_persons(c, scount[c]);
  }
}

double joint_log_likelihood(const std::vector<ItemModel>& models) {
  double s = 0.0;
  for (const auto& m : models) s += m.log_likelihood;
  return s;
}

}  // namespace

double permutation_p_value(double observed, const std::vector<double>& permuted) {
  std::size_t exceed = 0;
  for (double t : permuted) {
    if (t >= observed) ++exceed;
  }
  return (static_cast<double>(exceed) + 1.0) / (static_cast<double>(permuted.size()) + 1.0);
}

std::uint64_t permutation_key(std::uint64_t seed, int iteration, std::size_t item, std::size_t variable) {
  return derive_key(seed, {kPermutationStream, static_cast<std::uint64_t>(iteration), item, variable});
}

PermutationTestResult permutation_test(const ItemContext& ctx, const ItemModel& model, std::size_t item,
                                       std::size_t variable, std::span<const double> x, Strategy strategy,
                                       std::size_t min_node, int permutations, std::uint64_t key, double local_alpha,
                                       Execution execution) {
  if (permutations < 1) throw std::invalid_argument("permutation test needs at least one permutation");
  PermutationTestResult r;
  r.permutations = permutations;
  r.local_alpha = local_alpha;
  const SplitCandidate observed = best_split_for_variable(ctx, model, item, variable, x, strategy, min_node);
  r.observed = observed.valid() ? observed.statistic : 0.0;
  r.permuted = permutation_statistics(ctx, model, item, variable, x, strategy, min_node, permutations, key, execution);
  r.p_value = observed.valid() ? permutation_p_value(r.observed, r.permuted) : 1.0;
  return r;
}

GrowResult grow(const Dataset& data, Strategy strategy, const GrowOptions& options) {
  if (!options.trace && !(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (options.permutations < 1) throw std::invalid_argument("permutations must be at least 1");
  if (options.min_node < 1) throw std::invalid_argument("min_node must be at least 1");

  const std::size_t items = data.responses.items();
  const std::size_t m = data.covariates.variables();
  const auto& cov = data.covariates;

  std::vector<ItemContext> contexts(items);
  std::vector<ItemModel> models(items);
  GrowResult result;
  result.strategy = strategy;
  result.variables = m;
  result.local_alpha = options.alpha / static_cast<double>(m);
  result.trees.resize(items);
  for (std::size_t i = 0; i < items; ++i) {
    contexts[i] = make_item_context(data, i, options.score);
    models[i] = initial_item_model(contexts[i]);
    result.trees[i].item = i;
    sync_tree(result.trees[i], models[i]);
  }
  result.initial_log_likelihood = joint_log_likelihood(models);

  std::vector<SplitCandidate> best(items * m);
  std::vector<std::size_t> stale(items);
  std::iota(stale.begin(), stale.end(), std::size_t{0});
  std::vector<bool> closed(items, false);
  std::vector<bool> flagged(items, false);
  std::size_t flagged_count = 0;

  for (int iteration = 1;; ++iteration) {
    if (!stale.empty()) {
      auto fresh = scan_items(contexts, models, stale, cov, strategy, options.min_node, options.execution);
      for (std::size_t k = 0; k < stale.size(); ++k) {
        for (std::size_t j = 0; j < m; ++j) best[stale[k] * m + j] = fresh[k * m + j];
      }
      stale.clear();
    }

    const SplitCandidate* winner = nullptr;
    for (std::size_t i = 0; i < items; ++i) {
      if (closed[i]) continue;
      for (std::size_t j = 0; j < m; ++j) {
        const auto& c = best[i * m + j];
        if (c.valid() && (!winner || better_candidate(c, *winner))) winner = &c;
      }
    }
    if (!winner) break;
    const SplitCandidate split = *winner;
    const std::size_t i = split.item;
    const std::size_t j = split.variable;

    const PermutationTestResult test =
        permutation_test(contexts[i], models[i], i, j, cov.column(j), strategy, options.min_node,
                         options.permutations, permutation_key(options.seed, iteration, i, j), result.local_alpha,
                         options.execution);

    TrailStep step;
    step.iteration = iteration;
    step.item = i;
    step.variable = j;
    step.cell = split.cell;
    step.component = split.component;
    step.threshold = split.threshold;
    step.statistic = split.statistic;
    step.p_value = test.p_value;
    step.accepted = options.trace || test.significant();

    if (step.accepted) {
      apply_split(contexts[i], models[i], cov.column(j), split);
      auto& tree = result.trees[i];
      if (split.component != Component::Slope) tree.intercept.split(split.cell, j, split.threshold);
      if (split.component != Component::Intercept) tree.slope.split(split.cell, j, split.threshold);
      sync_tree(tree, models[i]);
      tree.splits.push_back({iteration, j, split.cell, split.component, split.threshold, split.statistic, test.p_value});
      if (!flagged[i]) {
        flagged[i] = true;
        ++flagged_count;
      }
      stale.push_back(i);
    } else if (options.per_item_stopping) {
      closed[i] = true;
    }
    step.joint_log_likelihood = joint_log_likelihood(models);
    result.trail.push_back(step);

    if (!step.accepted && !options.per_item_stopping) break;
    if (options.trace && flagged_count == items) break;
  }
  return result;
}

}  // namespace ift
