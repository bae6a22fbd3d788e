#include "ift/split_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include <omp.h>

#include "ift/error.hpp"
#include "ift/rng.hpp"

namespace ift {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Udif: return "udif";
    case Strategy::Dif: return "dif";
    case Strategy::Nudif: return "nudif";
  }
  return "udif";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "udif" || text == "UDIF") return Strategy::Udif;
  if (text == "dif" || text == "DIF") return Strategy::Dif;
  if (text == "nudif" || text == "NUDIF") return Strategy::Nudif;
  throw std::invalid_argument("unknown strategy \"" + std::string(text) + "\" (expected udif, dif or nudif)");
}

std::vector<Component> strategy_components(Strategy strategy) {
  switch (strategy) {
    case Strategy::Udif: return {Component::Intercept};
    case Strategy::Dif: return {Component::Intercept, Component::Slope};
    case Strategy::Nudif: return {Component::Simultaneous};
  }
  return {};
}

ItemContext make_item_context(const Dataset& data, std::size_t item, const ScoreOptions& options) {
  ItemContext ctx;
  ctx.y = data.responses.column(item);
  const ScoreVector s = item_score(data.responses, data.scores, item, options);
  ctx.levels = s;
  std::sort(ctx.levels.begin(), ctx.levels.end());
  ctx.levels.erase(std::unique(ctx.levels.begin(), ctx.levels.end()), ctx.levels.end());
  ctx.level.resize(s.size());
  for (std::size_t p = 0; p < s.size(); ++p) {
    ctx.level[p] = static_cast<int>(std::lower_bound(ctx.levels.begin(), ctx.levels.end(), s[p]) - ctx.levels.begin());
  }
  return ctx;
}

CellTable tabulate(const ItemContext& ctx, const ItemModel& model) {
  CellTable table(model.intercept_cells, model.slope_cells, static_cast<int>(ctx.levels.size()));
  for (std::size_t p = 0; p < ctx.y.size(); ++p) {
    table.add(model.intercept_cell[p], model.slope_cell[p], ctx.level[p], 1.0, ctx.y[p]);
  }
  return table;
}

void refit(const ItemContext& ctx, ItemModel& model) {
  const CellTable table = tabulate(ctx, model);
  const auto map = CellParameterMap::identity(model.intercept_cells, model.slope_cells);
  PartitionFit fit = fit_partition_model(table, ctx.levels, map, model.coefficients);
  if (fit.rank_deficient) throw RankDeficientError("item model is rank deficient");
  model.coefficients = std::move(fit.coefficients);
  model.log_likelihood = fit.log_likelihood;
  model.separation = fit.separation;
}

ItemModel initial_item_model(const ItemContext& ctx) {
  ItemModel model;
  model.intercept_cell.assign(ctx.y.size(), 0);
  model.slope_cell.assign(ctx.y.size(), 0);
  model.coefficients.assign(2, 0.0);
  refit(ctx, model);
  return model;
}

bool better_candidate(const SplitCandidate& a, const SplitCandidate& b) {
  if (a.statistic != b.statistic) return a.statistic > b.statistic;
  if (a.item != b.item) return a.item < b.item;
  if (a.variable != b.variable) return a.variable < b.variable;
  if (a.threshold != b.threshold) return a.threshold < b.threshold;
  if (a.component != b.component) return static_cast<int>(a.component) < static_cast<int>(b.component);
  return a.cell < b.cell;
}

namespace {

bool splits_intercept(Component c) { return c != Component::Slope; }
bool splits_slope(Component c) { return c != Component::Intercept; }

// Coefficients of the model after splitting, with each new child starting at
// its parent's value.
std::vector<double> extended_start(const ItemModel& m, int cell, bool split_i, bool split_s) {
  std::vector<double> s;
  s.reserve(m.coefficients.size() + 2);
  for (int c = 0; c < m.intercept_cells; ++c) s.push_back(m.coefficients[c]);
  if (split_i) s.push_back(m.coefficients[cell]);
  for (int c = 0; c < m.slope_cells; ++c) s.push_back(m.coefficients[m.intercept_cells + c]);
  if (split_s) s.push_back(m.coefficients[m.intercept_cells + cell]);
  return s;
}

// Map for the simultaneous split's restricted model: the intercept is split,
// the new slope cell shares its parent's slope.
CellParameterMap intercept_only_map(int ni, int ns, int parent) {
  CellParameterMap map = CellParameterMap::identity(ni, ns);
  map.slope[ns - 1] = parent;
  map.slope_params = ns - 1;
  return map;
}

struct NodeBuffers {
  std::vector<std::pair<double, int>> members;
  std::vector<double> permuted;
};

NodeBuffers& buffers() {
  thread_local NodeBuffers b;
  return b;
}

// Walks all thresholds of one terminal node, moving persons from the right
// child into the left child in covariate order and fitting each candidate on
// the updated grouped counts.
void sweep_node(const ItemContext& ctx, const ItemModel& model, std::size_t item, std::size_t variable,
                std::span<const double> x, int cell, Component component, std::size_t min_node, SplitCandidate& best,
                std::vector<SplitCandidate>* all) {
  const bool split_i = splits_intercept(component);
  const bool split_s = splits_slope(component);
  const auto& membership = component == Component::Slope ? model.slope_cell : model.intercept_cell;

  auto& node = buffers().members;
  node.clear();
  for (std::size_t p = 0; p < membership.size(); ++p) {
    if (membership[p] == cell) node.emplace_back(x[p], static_cast<int>(p));
  }
  const std::size_t n = node.size();
  if (n < 2 * min_node || n < 2) return;
  std::sort(node.begin(), node.end());
  if (node.front().first == node.back().first) return;

  const int new_i = model.intercept_cells;
  const int new_s = model.slope_cells;
  const int ni = model.intercept_cells + (split_i ? 1 : 0);
  const int ns = model.slope_cells + (split_s ? 1 : 0);
  const int levels = static_cast<int>(ctx.levels.size());

  CellTable table(ni, ns, levels);
  for (std::size_t p = 0; p < ctx.y.size(); ++p) {
    int ic = model.intercept_cell[p];
    int sc = model.slope_cell[p];
    if (membership[p] == cell) {
      if (split_i) ic = new_i;
      if (split_s) sc = new_s;
    }
    table.add(ic, sc, ctx.level[p], 1.0, ctx.y[p]);
  }

  const int slope_parent = component == Component::Intercept ? 0 : cell;
  const auto full_map = CellParameterMap::identity(ni, ns);
  const auto parent_full = extended_start(model, cell, split_i, split_s);
  CellParameterMap restricted_map;
  std::vector<double> parent_restricted;
  if (component == Component::Simultaneous) {
    restricted_map = intercept_only_map(ni, ns, slope_parent);
    parent_restricted = extended_start(model, cell, true, false);
  }
  // Adjacent thresholds differ by a few persons, so the previous candidate's
  // estimates are a close start; fall back to the parent after separation.
  std::vector<double> full_start = parent_full;
  std::vector<double> restricted_start = parent_restricted;

  std::size_t k = 0;
  while (k < n) {
    const double v = node[k].first;
    while (k < n && node[k].first == v) {
      const int p = node[k].second;
      const int ic = model.intercept_cell[p];
      const int sc = model.slope_cell[p];
      table.move(split_i ? new_i : ic, split_s ? new_s : sc, split_i ? cell : ic, split_s ? cell : sc, ctx.level[p],
                 ctx.y[p]);
      ++k;
    }
    if (k >= n) break;
    const std::size_t left = k;
    const std::size_t right = n - k;
    if (right < min_node) break;
    if (left < min_node) continue;

    const PartitionFit full = fit_partition_model(table, ctx.levels, full_map, full_start);
    if (full.rank_deficient) continue;
    full_start = full.separation || !full.converged ? parent_full : full.coefficients;
    double base = model.log_likelihood;
    bool separation = full.separation;
    if (component == Component::Simultaneous) {
      const PartitionFit restricted = fit_partition_model(table, ctx.levels, restricted_map, restricted_start);
      if (restricted.rank_deficient) continue;
      restricted_start =
          restricted.separation || !restricted.converged ? parent_restricted : restricted.coefficients;
      base = restricted.log_likelihood;
      separation = separation || restricted.separation;
    }

    SplitCandidate cand;
    cand.item = item;
    cand.variable = variable;
    cand.cell = cell;
    cand.component = component;
    cand.threshold = 0.5 * (v + node[k].first);
    cand.statistic = std::max(0.0, 2.0 * (full.log_likelihood - base));
    cand.left = left;
    cand.right = right;
    cand.separation = separation;
    if (all) all->push_back(cand);
    if (!best.valid() || better_candidate(cand, best)) best = cand;
  }
}

int component_cells(const ItemModel& model, Component component) {
  return component == Component::Slope ? model.slope_cells : model.intercept_cells;
}

}  // namespace

SplitEvaluation evaluate_split(const ItemContext& ctx, const ItemModel& model, std::span<const double> x, int cell,
                               Component component, double threshold) {
  const bool split_i = splits_intercept(component);
  const bool split_s = splits_slope(component);
  const auto& membership = component == Component::Slope ? model.slope_cell : model.intercept_cell;
  const int ni = model.intercept_cells + (split_i ? 1 : 0);
  const int ns = model.slope_cells + (split_s ? 1 : 0);
  CellTable table(ni, ns, static_cast<int>(ctx.levels.size()));
  for (std::size_t p = 0; p < ctx.y.size(); ++p) {
    int ic = model.intercept_cell[p];
    int sc = model.slope_cell[p];
    if (membership[p] == cell && x[p] > threshold) {
      if (split_i) ic = model.intercept_cells;
      if (split_s) sc = model.slope_cells;
    }
    table.add(ic, sc, ctx.level[p], 1.0, ctx.y[p]);
  }
  SplitEvaluation ev;
  ev.fit = fit_partition_model(table, ctx.levels, CellParameterMap::identity(ni, ns),
                               extended_start(model, cell, split_i, split_s));
  ev.rank_deficient = ev.fit.rank_deficient;
  if (ev.rank_deficient) return ev;
  double base = model.log_likelihood;
  if (component == Component::Simultaneous) {
    ev.restricted = fit_partition_model(table, ctx.levels, intercept_only_map(ni, ns, cell),
                                        extended_start(model, cell, true, false));
    ev.rank_deficient = ev.restricted.rank_deficient;
    if (ev.rank_deficient) return ev;
    base = ev.restricted.log_likelihood;
  }
  ev.statistic = std::max(0.0, 2.0 * (ev.fit.log_likelihood - base));
  ev.df = 1;
  return ev;
}

SplitCandidate best_split_for_variable(const ItemContext& ctx, const ItemModel& model, std::size_t item,
                                       std::size_t variable, std::span<const double> x, Strategy strategy,
                                       std::size_t min_node, std::vector<SplitCandidate>* all) {
  SplitCandidate best;
  best.item = item;
  best.variable = variable;
  for (Component component : strategy_components(strategy)) {
    const int cells = component_cells(model, component);
    for (int cell = 0; cell < cells; ++cell) {
      sweep_node(ctx, model, item, variable, x, cell, component, min_node, best, all);
    }
  }
  return best;
}

std::optional<double> maximally_selected_stat(const ItemContext& ctx, const ItemModel& model, std::size_t item,
                                              std::size_t variable, std::span<const double> x, Strategy strategy,
                                              std::size_t min_node) {
  const SplitCandidate best = best_split_for_variable(ctx, model, item, variable, x, strategy, min_node);
  if (!best.valid()) return std::nullopt;
  return best.statistic;
}

std::vector<SplitCandidate> scan_items(std::span<const ItemContext> contexts, std::span<const ItemModel> models,
                                       std::span<const std::size_t> items, const CovariateTable& covariates,
                                       Strategy strategy, std::size_t min_node, Execution execution) {
  const std::size_t m = covariates.variables();
  const auto tasks = static_cast<std::ptrdiff_t>(items.size() * m);
  std::vector<SplitCandidate> out(static_cast<std::size_t>(tasks));
  auto run = [&](std::ptrdiff_t t) {
    const std::size_t item = items[static_cast<std::size_t>(t) / m];
    const std::size_t j = static_cast<std::size_t>(t) % m;
    out[static_cast<std::size_t>(t)] =
        best_split_for_variable(contexts[item], models[item], item, j, covariates.column(j), strategy, min_node);
  };
  if (execution == Execution::Serial) {
    for (std::ptrdiff_t t = 0; t < tasks; ++t) run(t);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < tasks; ++t) run(t);
  }
  return out;
}

std::vector<double> permutation_statistics(const ItemContext& ctx, const ItemModel& model, std::size_t item,
                                           std::size_t variable, std::span<const double> x, Strategy strategy,
                                           std::size_t min_node, int permutations, std::uint64_t key,
                                           Execution execution) {
  std::vector<double> out(static_cast<std::size_t>(std::max(permutations, 0)));
  auto run = [&](int r) {
    auto& perm = buffers().permuted;
    perm.assign(x.begin(), x.end());
    CounterRng rng(derive_key(key, {static_cast<std::uint64_t>(r)}));
    rng.shuffle(std::span<double>(perm));
    const SplitCandidate best = best_split_for_variable(ctx, model, item, variable, perm, strategy, min_node);
    out[static_cast<std::size_t>(r)] = best.valid() ? best.statistic : -std::numeric_limits<double>::infinity();
  };
  if (execution == Execution::Serial) {
    for (int r = 0; r < permutations; ++r) run(r);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (int r = 0; r < permutations; ++r) run(r);
  }
  return out;
}

void apply_split(const ItemContext& ctx, ItemModel& model, std::span<const double> x, const SplitCandidate& split) {
  const bool split_i = splits_intercept(split.component);
  const bool split_s = splits_slope(split.component);
  std::vector<double> start = extended_start(model, split.cell, split_i, split_s);
  if (split_i) {
    const int fresh = model.intercept_cells++;
    for (std::size_t p = 0; p < x.size(); ++p) {
      if (model.intercept_cell[p] == split.cell && x[p] > split.threshold) model.intercept_cell[p] = fresh;
    }
  }
  if (split_s) {
    const int fresh = model.slope_cells++;
    for (std::size_t p = 0; p < x.size(); ++p) {
      if (model.slope_cell[p] == split.cell && x[p] > split.threshold) model.slope_cell[p] = fresh;
    }
  }
  model.coefficients = std::move(start);
  refit(ctx, model);
}

}  // namespace ift
