// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 5        run the listed criteria only

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "ift/classical.hpp"
#include "ift/evaluation.hpp"
#include "ift/experiment.hpp"
#include "ift/glm.hpp"
#include "ift/grow.hpp"
#include "ift/rng.hpp"
#include "ift/simulation.hpp"
#include "oracles.hpp"

using namespace ift;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

MethodConfig method(Method m, Strategy s, int permutations = 200, double alpha = 0.05) {
  MethodConfig c;
  c.method = m;
  c.strategy = s;
  c.grow.alpha = alpha;
  c.grow.permutations = permutations;
  c.grow.min_node = 30;
  return c;
}

double mean_of(const Summary& s) { return s.count ? s.mean : std::nan(""); }

// Every grown tree seen by the suite, for the partition property check.
std::vector<std::pair<ItemTree, CovariateTable>>& grown_trees() {
  static std::vector<std::pair<ItemTree, CovariateTable>> trees;
  return trees;
}

void collect(const ExperimentResult& res, const ScenarioSpec& scenario) {
  for (std::size_t r = 0; r < res.runs.size(); ++r) {
    if (!res.runs[r].growth) continue;
    const auto sim = simulate(scenario, replication_seed(scenario.seed, r));
    for (const auto& tree : res.runs[r].growth->trees) {
      if (tree.has_dif()) grown_trees().emplace_back(tree, sim.data.covariates);
    }
  }
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  ScenarioSpec s;
  s.persons = 400;
  s.items = 20;
  s.kind = DifKind::None;
  s.design = CovariateDesign::Binary1;
  s.replications = 50;
  s.seed = 101;
  const auto tree = run_experiment(s, method(Method::Ift, Strategy::Udif));
  const auto logit = run_experiment(s, method(Method::LogisticExtended, Strategy::Udif));
  collect(tree, s);
  const double ft = mean_of(tree.summary.fpr_item), fl = mean_of(logit.summary.fpr_item);
  const bool pass = ft >= 0.02 && ft <= 0.09 && fl >= 0.02 && fl <= 0.09;
  return {pass, fmt("null FPR_I: IFT %.4f, extended logistic %.4f (required in [0.02, 0.09])", ft, fl)};
}

Outcome criterion2() {
  ScenarioSpec s;
  s.persons = 400;
  s.items = 20;
  s.kind = DifKind::None;
  s.design = CovariateDesign::ThreeCovariates;
  s.replications = 30;
  s.seed = 202;
  const auto res = run_experiment(s, method(Method::Ift, Strategy::Udif));
  collect(res, s);
  const double fi = mean_of(res.summary.fpr_item), fiv = mean_of(res.summary.fpr_item_variable);
  // With no false alarms at all both rates are zero; FPR_IV < FPR_I cannot
  // hold strictly then, and the ordering is vacuous.
  const bool ordered = fiv < fi || (fi == 0.0 && fiv == 0.0);
  const bool pass = fi <= 0.06 && ordered && fiv <= 0.03;
  return {pass, fmt("three covariates: FPR_I %.4f (<= 0.06), FPR_IV %.4f (< FPR_I, <= 0.03)", fi, fiv)};
}

Outcome criterion3() {
  ScenarioSpec s;
  s.persons = 400;
  s.items = 20;
  s.dif_fraction = 0.2;
  s.strength = 1.6;
  s.kind = DifKind::UniformBinary;
  s.design = CovariateDesign::Binary1;
  s.replications = 20;
  s.seed = 303;

  double max_ll = 0.0, max_lr = 0.0;
  for (std::size_t r = 0; r < 20; ++r) {
    const auto sim = simulate(s, replication_seed(s.seed, r));
    const auto& data = sim.data;
    const auto x = data.covariates.column(0);
    for (std::size_t i = 0; i < data.responses.items(); ++i) {
      const auto ctx = make_item_context(data, i, {});
      const auto model = initial_item_model(ctx);
      const auto ev = evaluate_split(ctx, model, x, 0, Component::Intercept, 0.5);

      DesignMatrix d(data.responses.persons());
      d.add_intercept();
      d.add_column("score", std::vector<double>(data.scores.begin(), data.scores.end()));
      d.add_column("x", std::vector<double>(x.begin(), x.end()));
      const auto y = data.responses.column(i);
      const auto dense = fit_logistic(d, y);
      const auto ext = fit_udif_extended(data, i);
      max_ll = std::max(max_ll, std::abs(ev.fit.log_likelihood - dense.log_likelihood));
      max_lr = std::max(max_lr, std::abs(ev.statistic - ext.lr.statistic));
    }
  }

  auto c = method(Method::Ift, Strategy::Udif);
  const auto tree = run_experiment(s, c, true);
  const auto logit = run_experiment(s, method(Method::LogisticExtended, Strategy::Udif), true);
  collect(tree, s);
  const double gap = std::abs(tree.auc - logit.auc);
  const bool pass = max_ll <= 1e-6 && max_lr <= 1e-6 && gap <= 0.03;
  return {pass, fmt("max |ll diff| %.2e, max |LR diff| %.2e (<= 1e-6); AUC IFT %.4f vs logistic %.4f, "
                    "gap %.4f (<= 0.03)",
                    max_ll, max_lr, tree.auc, logit.auc, gap)};
}

Outcome criterion4() {
  ScenarioSpec s;
  s.persons = 400;
  s.items = 20;
  s.dif_fraction = 0.2;
  s.strength = 1.6;
  s.kind = DifKind::UniformOrdinal;
  s.design = CovariateDesign::Ordinal1;
  s.replications = 20;
  s.seed = 404;
  const auto tree = run_experiment(s, method(Method::Ift, Strategy::Udif), true);
  const auto groups = run_experiment(s, method(Method::LogisticClassical, Strategy::Udif), true);
  collect(tree, s);
  return {tree.auc >= groups.auc,
          fmt("ordinal covariate: AUC IFT %.4f >= classical 6-group logistic %.4f", tree.auc, groups.auc)};
}

Outcome criterion5() {
  ScenarioSpec s;
  s.persons = 800;
  s.items = 20;
  s.strength = 1.6;
  s.kind = DifKind::UniformComplex;
  s.design = CovariateDesign::ThreeCovariates;
  s.replications = 20;
  s.seed = 505;
  const auto res = run_experiment(s, method(Method::Ift, Strategy::Udif));
  collect(res, s);
  const double ti = mean_of(res.summary.tpr_item), tiv = mean_of(res.summary.tpr_item_variable);
  const bool pass = ti >= 0.85 && tiv >= 0.75 * ti;
  return {pass, fmt("P=800, 10%% DIF, c=1.6: TPR_I %.4f (>= 0.85), TPR_IV %.4f (>= 0.75 TPR_I = %.4f)", ti, tiv,
                    0.75 * ti)};
}

// True when `node` or one of its descendants splits on `variable`.
bool subtree_splits_on(const ComponentTree& tree, int node, int variable) {
  const auto& n = tree.nodes()[node];
  if (n.variable < 0) return false;
  if (n.variable == variable) return true;
  return subtree_splits_on(tree, n.left, variable) || subtree_splits_on(tree, n.right, variable);
}

Outcome criterion6() {
  ScenarioSpec s;
  s.persons = 800;
  s.items = 20;
  s.strength = 0.8;
  s.kind = DifKind::UniformComplex;
  s.design = CovariateDesign::ThreeCovariates;
  s.replications = 20;
  s.seed = 606;
  const auto res = run_experiment(s, method(Method::Ift, Strategy::Udif));
  collect(res, s);
  int hits = 0;
  for (const auto& run : res.runs) {
    const auto& t = run.growth->trees[0].intercept;
    const auto& root = t.nodes()[0];
    if (root.variable == 2 && std::abs(root.threshold) <= 0.3 && subtree_splits_on(t, root.right, 0)) ++hits;
  }
  const double share = hits / 20.0;
  return {share >= 0.6, fmt("complex tree recovered in %d of 20 replications (%.0f%%, required >= 60%%)", hits,
                            100.0 * share)};
}

Outcome criterion7() {
  ScenarioSpec s;
  s.persons = 800;
  s.items = 20;
  s.dif_fraction = 0.2;
  s.slope_shift = 0.6;
  s.kind = DifKind::NonuniformBinary;
  s.design = CovariateDesign::Binary1;
  s.replications = 20;
  s.seed = 707;
  const auto ld = run_experiment(s, method(Method::LogisticExtended, Strategy::Dif));
  const auto td = run_experiment(s, method(Method::Ift, Strategy::Dif));
  const auto ln = run_experiment(s, method(Method::LogisticExtended, Strategy::Nudif));
  const auto tn = run_experiment(s, method(Method::Ift, Strategy::Nudif));
  collect(td, s);
  collect(tn, s);
  const double a = mean_of(ld.summary.tpr_item), b = mean_of(td.summary.tpr_item);
  const double c = mean_of(ln.summary.tpr_item), d = mean_of(tn.summary.tpr_item);
  auto near = [](double v, double target) { return std::abs(v - target) <= 0.15; };
  const bool pass = near(a, 0.66) && near(b, 0.43) && near(c, 0.44) && near(d, 0.44) && a > b;
  return {pass, fmt("TPR_I DIF: logistic %.3f (0.66), IFT %.3f (0.43); NUDIF: logistic %.3f (0.44), IFT %.3f (0.44)",
                    a, b, c, d)};
}

Outcome criterion8() {
  CounterRng rng(derive_key(808, {}));
  double worst_coef = 0.0, worst_grad = 0.0;
  for (int problem = 0; problem < 50; ++problem) {
    const auto prob = oracle::random_problem(rng);
    const auto fit = fit_logistic(prob.x, prob.y);
    const auto grid = oracle::grid_maximizer(prob);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      worst_coef = std::max(worst_coef, std::abs(fit.coefficients[k] - grid[k]));
    }
    const auto g = oracle::finite_difference_gradient(prob, fit.coefficients);
    for (double v : g) worst_grad = std::max(worst_grad, std::abs(v));
  }
  double worst_tail = 0.0;
  for (const auto& [x, df] : oracle::chi_square_probes()) {
    worst_tail = std::max(worst_tail, std::abs(chi_square_upper_tail(x, df) - oracle::chi_square_tail(x, df)));
  }
  const bool pass = worst_coef <= 1e-4 && worst_grad <= 1e-6 && worst_tail <= 1e-8;
  return {pass, fmt("max |coef - grid| %.2e (<= 1e-4), max |FD gradient| %.2e (<= 1e-6), max chi-square tail "
                    "error %.2e (<= 1e-8)",
                    worst_coef, worst_grad, worst_tail)};
}

// --- criterion 9 -------------------------------------------------------------

bool same_trail(const std::vector<TrailStep>& a, const std::vector<TrailStep>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto &x = a[k], &y = b[k];
    if (x.item != y.item || x.variable != y.variable || x.cell != y.cell || x.component != y.component ||
        x.threshold != y.threshold || x.statistic != y.statistic || x.p_value != y.p_value ||
        x.accepted != y.accepted || x.joint_log_likelihood != y.joint_log_likelihood) {
      return false;
    }
  }
  return true;
}

Dataset with_column(const Dataset& data, std::size_t j, const std::function<double(double)>& f) {
  std::vector<std::vector<double>> cols;
  for (std::size_t v = 0; v < data.covariates.variables(); ++v) {
    const auto c = data.covariates.column(v);
    cols.emplace_back(c.begin(), c.end());
  }
  for (auto& v : cols[j]) v = f(v);
  return Dataset(data.responses, CovariateTable(data.covariates.specs(), std::move(cols)));
}

Outcome criterion9() {
  std::vector<std::string> notes;
  bool pass = true;

  // Permutation p-values under H0.
  {
    ScenarioSpec s;
    s.persons = 200;
    s.items = 10;
    s.design = CovariateDesign::ThreeCovariates;
    std::vector<double> p(200);
#pragma omp parallel for schedule(dynamic, 1)
    for (int d = 0; d < 200; ++d) {
      const auto sim = simulate(s, derive_key(909, {static_cast<std::uint64_t>(d)}));
      const auto ctx = make_item_context(sim.data, 0, {});
      const auto model = initial_item_model(ctx);
      const auto t = permutation_test(ctx, model, 0, 2, sim.data.covariates.column(2), Strategy::Udif, 30, 199,
                                      derive_key(910, {static_cast<std::uint64_t>(d)}), 0.05, Execution::Serial);
      p[d] = t.p_value;
    }
    const double ks = oracle::ks_uniform(p);
    notes.push_back(fmt("KS %.4f", ks));
    pass = pass && ks < 0.1;
  }

  // Disjoint and exhaustive partitions.
  {
    std::size_t bad = 0, checked = 0;
    for (const auto& [tree, cov] : grown_trees()) {
      for (const ComponentTree* t : {&tree.intercept, &tree.slope}) {
        for (std::size_t p = 0; p < cov.persons(); ++p) {
          const auto x = cov.row(p);
          int hits = 0, owner = -1;
          for (int c = 0; c < t->cells(); ++c) {
            if (t->region(c).contains(x)) {
              ++hits;
              owner = c;
            }
          }
          if (hits != 1 || owner != t->cell_of(x)) ++bad;
        }
        ++checked;
      }
    }
    notes.push_back(fmt("%zu trees partitioned, %zu violations", checked, bad));
    pass = pass && bad == 0 && checked > 0;
  }

  ScenarioSpec s;
  s.persons = 800;
  s.items = 20;
  s.strength = 1.6;
  s.kind = DifKind::UniformComplex;
  s.design = CovariateDesign::ThreeCovariates;
  const auto sim = simulate(s, 919);
  GrowOptions opts;
  opts.permutations = 100;
  opts.seed = 919;

  // Monotone transforms of a covariate leave the grown structure unchanged.
  {
    const auto base = grow(sim.data, Strategy::Udif, opts);
    const auto shifted = grow(with_column(sim.data, 2, [](double v) { return std::exp(v) * 3.0 - 1.0; }),
                              Strategy::Udif, opts);
    bool same = base.trail.size() == shifted.trail.size();
    for (std::size_t k = 0; same && k < base.trail.size(); ++k) {
      const auto &a = base.trail[k], &b = shifted.trail[k];
      same = a.item == b.item && a.variable == b.variable && a.cell == b.cell && a.component == b.component &&
             a.p_value == b.p_value && std::abs(a.statistic - b.statistic) <= 1e-8 * std::max(1.0, a.statistic);
    }
    notes.push_back(fmt("monotone invariance %s (%zu steps)", same ? "holds" : "VIOLATED", base.trail.size()));
    pass = pass && same;

    // LR >= 0 and the joint likelihood never decreases over commits.
    double ll = base.initial_log_likelihood;
    bool monotone = true;
    for (const auto& step : base.trail) {
      if (step.statistic < 0.0) monotone = false;
      if (!step.accepted) continue;
      if (step.joint_log_likelihood < ll - 1e-9) monotone = false;
      ll = step.joint_log_likelihood;
    }
    notes.push_back(fmt("LR >= 0 and monotone likelihood %s", monotone ? "hold" : "VIOLATED"));
    pass = pass && monotone;
  }

  // Bit-identical results across thread counts and against the serial kernels.
  {
    GrowOptions serial = opts;
    serial.execution = Execution::Serial;
    const auto reference = grow(sim.data, Strategy::Dif, serial);
    bool same = true;
    const int saved = omp_get_max_threads();
    for (int threads : {1, 2, 3, 8}) {
      omp_set_num_threads(threads);
      same = same && same_trail(reference.trail, grow(sim.data, Strategy::Dif, opts).trail);
    }
    omp_set_num_threads(saved);
    notes.push_back(fmt("thread counts 1/2/3/8 %s", same ? "bit-identical" : "DIFFER"));
    pass = pass && same;
  }

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  // Criterion 9 inspects the trees grown by the others, so it runs last.
  const std::map<int, std::function<Outcome()>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));
  if (selected.empty()) {
    for (const auto& [id, _] : criteria) selected.insert(id);
  }
  if (selected.count(9) && selected.size() == 1) {
    // Give the partition check something to inspect.
    selected.insert(6);
  }

  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", id, out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
