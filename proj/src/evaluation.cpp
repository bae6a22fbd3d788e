#include "ift/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ift {

DetectionResult::DetectionResult(std::size_t items_, std::size_t variables_)
    : items(items_), variables(variables_), delta_hat(items_ * variables_, 0), item_flags(items_, 0) {}

void DetectionResult::flag(std::size_t i, std::size_t j) {
  delta_hat[i * variables + j] = 1;
  item_flags[i] = 1;
}

DetectionResult detection_from_trees(const std::vector<ItemTree>& trees, std::size_t variables) {
  DetectionResult d(trees.size(), variables);
  for (std::size_t i = 0; i < trees.size(); ++i) {
    for (auto j : trees[i].dif_variables()) d.flag(i, j);
  }
  return d;
}

DetectionResult detection_from_tests(const std::vector<ItemTestResult>& tests, std::size_t items,
                                     std::size_t variables, double alpha) {
  DetectionResult d(items, variables);
  d.variable_level = false;
  for (const auto& t : tests) {
    if (t.item >= items) throw std::out_of_range("test result item out of range");
    if (t.lr.p_value < alpha) {
      for (std::size_t j = 0; j < variables; ++j) d.flag(t.item, j);
    }
  }
  return d;
}

DetectionResult detection_from_trail(const std::vector<TrailStep>& trail, std::size_t items, std::size_t variables,
                                     double alpha) {
  DetectionResult d(items, variables);
  const double local = alpha / static_cast<double>(variables);
  for (const auto& step : trail) {
    if (!(step.p_value < local)) break;
    d.flag(step.item, step.variable);
  }
  return d;
}

Metrics compute_metrics(const GroundTruth& truth, const DetectionResult& result) {
  if (truth.items != result.items || truth.variables != result.variables) {
    throw std::invalid_argument("ground truth and detection dimensions disagree");
  }
  std::size_t pos = 0, neg = 0, tp = 0, fp = 0;
  std::size_t pos_iv = 0, neg_iv = 0, tp_iv = 0, fp_iv = 0;
  for (std::size_t i = 0; i < truth.items; ++i) {
    const bool flagged = result.item_flags[i] != 0;
    if (truth.has_dif(i)) {
      ++pos;
      tp += flagged;
    } else {
      ++neg;
      fp += flagged;
    }
    for (std::size_t j = 0; j < truth.variables; ++j) {
      const bool hit = result.at(i, j);
      if (truth.at(i, j)) {
        ++pos_iv;
        tp_iv += hit;
      } else {
        ++neg_iv;
        fp_iv += hit;
      }
    }
  }
  auto rate = [](std::size_t k, std::size_t n) -> std::optional<double> {
    if (n == 0) return std::nullopt;
    return static_cast<double>(k) / static_cast<double>(n);
  };
  Metrics m;
  m.tpr_item = rate(tp, pos);
  m.fpr_item = rate(fp, neg);
  if (result.variable_level) {
    m.tpr_item_variable = rate(tp_iv, pos_iv);
    m.fpr_item_variable = rate(fp_iv, neg_iv);
  }
  return m;
}

DetectionResult AlphaDetector::at(double alpha) const {
  if (kind == Kind::Tests) return detection_from_tests(tests, items, variables, alpha);
  return detection_from_trail(trail, items, variables, alpha);
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int e = -60; e < -20; ++e) grid.push_back(std::pow(10.0, e / 10.0));  // 1e-6 .. ~8e-3
  for (int k = 1; k <= 1000; ++k) grid.push_back(k / 1000.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<RocPoint> roc_curve(std::span<const GroundTruth> truths, std::span<const AlphaDetector> detectors,
                                std::span<const double> alphas) {
  if (truths.size() != detectors.size()) throw std::invalid_argument("one detector per ground truth is required");
  std::vector<RocPoint> curve;
  curve.reserve(alphas.size());
  for (double alpha : alphas) {
    double fpr = 0.0, tpr = 0.0;
    std::size_t nf = 0, nt = 0;
    for (std::size_t r = 0; r < truths.size(); ++r) {
      const Metrics m = compute_metrics(truths[r], detectors[r].at(alpha));
      if (m.fpr_item) {
        fpr += *m.fpr_item;
        ++nf;
      }
      if (m.tpr_item) {
        tpr += *m.tpr_item;
        ++nt;
      }
    }
    curve.push_back({alpha, nf ? fpr / static_cast<double>(nf) : 0.0, nt ? tpr / static_cast<double>(nt) : 0.0});
  }
  return curve;
}

double roc_auc(std::span<const RocPoint> curve) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(curve.size() + 2);
  pts.emplace_back(0.0, 0.0);
  for (const auto& p : curve) pts.emplace_back(p.fpr, p.tpr);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    area += (pts[k].first - pts[k - 1].first) * 0.5 * (pts[k].second + pts[k - 1].second);
  }
  return area;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  auto quantile = [&](double q) {
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  return s;
}

MetricsSummary aggregate(std::span<const Metrics> metrics) {
  auto collect = [&](auto field) {
    std::vector<double> v;
    for (const auto& m : metrics) {
      if (m.*field) v.push_back(*(m.*field));
    }
    return summarize(v);
  };
  MetricsSummary s;
  s.tpr_item = collect(&Metrics::tpr_item);
  s.fpr_item = collect(&Metrics::fpr_item);
  s.tpr_item_variable = collect(&Metrics::tpr_item_variable);
  s.fpr_item_variable = collect(&Metrics::fpr_item_variable);
  return s;
}

}  // namespace ift
