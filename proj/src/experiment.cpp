#include "ift/experiment.hpp"

#include <exception>
#include <stdexcept>

namespace ift {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Ift: return "ift";
    case Method::LogisticClassical: return "logistic-classical";
    case Method::LogisticExtended: return "logistic-extended";
  }
  return "";
}

Method parse_method(std::string_view text) {
  for (auto m : {Method::Ift, Method::LogisticClassical, Method::LogisticExtended}) {
    if (text == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method \"" + std::string(text) +
                              "\" (expected ift, logistic-classical or logistic-extended)");
}

MethodRun run_method(const Dataset& data, const MethodConfig& config, bool trace) {
  const std::size_t items = data.responses.items();
  const std::size_t m = data.covariates.variables();
  MethodRun run;
  run.detector.items = items;
  run.detector.variables = m;

  if (config.method == Method::Ift) {
    GrowOptions opts = config.grow;
    if (trace && opts.per_item_stopping) {
      throw std::invalid_argument("alpha tracing replays global stopping and cannot be combined with per-item stopping");
    }
    opts.trace = trace;
    run.growth = grow(data, config.strategy, opts);
    run.detector.kind = AlphaDetector::Kind::Trail;
    run.detector.trail = run.growth->trail;
    run.detection = trace ? run.detector.at(config.grow.alpha) : detection_from_trees(run.growth->trees, m);
    return run;
  }

  ItemModelSpec spec;
  spec.strategy = config.strategy;
  spec.alpha = config.grow.alpha;
  spec.score = config.grow.score;
  if (config.method == Method::LogisticClassical) {
    spec.mode = ClassicalMode::Groups;
    spec.group_variable = config.group_variable.empty() ? data.covariates.spec(0).name : config.group_variable;
  } else {
    spec.mode = ClassicalMode::Extended;
  }
  run.tests = run_classical_suite(data, spec, {}, config.grow.execution);
  run.detector.kind = AlphaDetector::Kind::Tests;
  run.detector.tests = run.tests;
  run.detection = detection_from_tests(run.tests, items, m, config.grow.alpha);
  return run;
}

ExperimentResult run_experiment(const ScenarioSpec& scenario, const MethodConfig& config, bool with_roc,
                                Execution execution) {
  scenario.validate();
  ExperimentResult out;
  out.scenario = scenario;
  out.config = config;
  const std::size_t R = scenario.replications;
  out.truths.resize(R);
  out.runs.resize(R);
  out.metrics.resize(R);
  std::vector<std::exception_ptr> errors(R);

  auto one = [&](std::size_t r) {
    const std::uint64_t seed = replication_seed(scenario.seed, r);
    SimulatedDataset sim = simulate(scenario, seed);
    MethodConfig c = config;
    c.grow.seed = seed;
    // Replications already run in parallel; keep the kernels serial inside.
    if (execution == Execution::Parallel) c.grow.execution = Execution::Serial;
    out.runs[r] = run_method(sim.data, c, with_roc);
    out.metrics[r] = compute_metrics(sim.truth, out.runs[r].detection);
    out.truths[r] = std::move(sim.truth);
  };

  const auto n = static_cast<std::ptrdiff_t>(R);
  if (execution == Execution::Serial) {
    for (std::ptrdiff_t r = 0; r < n; ++r) one(static_cast<std::size_t>(r));
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      try {
        one(static_cast<std::size_t>(r));
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  out.summary = aggregate(out.metrics);
  if (with_roc) {
    std::vector<AlphaDetector> detectors;
    detectors.reserve(R);
    for (const auto& run : out.runs) detectors.push_back(run.detector);
    const auto grid = default_alpha_grid();
    out.roc = roc_curve(out.truths, detectors, grid);
    out.auc = roc_auc(out.roc);
  }
  return out;
}

}  // namespace ift
