#include <benchmark/benchmark.h>

#include "ift/classical.hpp"
#include "ift/grow.hpp"
#include "ift/simulation.hpp"

using namespace ift;

namespace {

// Range arg 0 selects the execution mode: 0 serial, 1 OpenMP.
Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

const Dataset& data() {
  static const Dataset d = [] {
    ScenarioSpec s;
    s.persons = 1000;
    s.items = 20;
    s.dif_fraction = 0.2;
    s.strength = 1.2;
    s.design = CovariateDesign::ThreeCovariates;
    s.kind = DifKind::UniformComplex;
    return simulate(s, 11).data;
  }();
  return d;
}

struct Contexts {
  std::vector<ItemContext> contexts;
  std::vector<ItemModel> models;
  std::vector<std::size_t> items;
};

const Contexts& contexts() {
  static const Contexts c = [] {
    Contexts out;
    for (std::size_t i = 0; i < data().responses.items(); ++i) {
      out.contexts.push_back(make_item_context(data(), i, {}));
      out.models.push_back(initial_item_model(out.contexts.back()));
      out.items.push_back(i);
    }
    return out;
  }();
  return c;
}

void BM_ScanItems(benchmark::State& state) {
  const auto& c = contexts();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        scan_items(c.contexts, c.models, c.items, data().covariates, Strategy::Dif, 30, mode(state)));
  }
}

void BM_PermutationStatistics(benchmark::State& state) {
  const auto& c = contexts();
  const auto x = data().covariates.column(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        permutation_statistics(c.contexts[0], c.models[0], 0, 2, x, Strategy::Udif, 30, 100, 5, mode(state)));
  }
}

void BM_ClassicalSuite(benchmark::State& state) {
  ItemModelSpec spec;
  spec.strategy = Strategy::Dif;
  for (auto _ : state) benchmark::DoNotOptimize(run_classical_suite(data(), spec, {}, mode(state)));
}

void BM_Grow(benchmark::State& state) {
  GrowOptions options;
  options.permutations = 100;
  options.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(grow(data(), Strategy::Udif, options));
}

}  // namespace

BENCHMARK(BM_ScanItems)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PermutationStatistics)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassicalSuite)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Grow)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
