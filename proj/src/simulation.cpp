#include "ift/simulation.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

#include "ift/error.hpp"
#include "ift/rng.hpp"

namespace ift {

namespace {

constexpr std::uint64_t kThetaStream = 1;
constexpr std::uint64_t kDifficultyStream = 2;
constexpr std::uint64_t kDiscriminationStream = 3;
constexpr std::uint64_t kResponseStream = 4;
constexpr std::uint64_t kCovariateStream = 5;
constexpr std::uint64_t kReplicationStream = 6;

std::vector<double> normals(std::size_t n, std::uint64_t key) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = CounterRng(key, 2 * k).normal();
  return out;
}

void check_persons(const ParameterMatrix& m, std::span<const double> x) {
  if (x.size() != m.persons) throw std::invalid_argument("covariate length does not match persons");
}

void check_symmetric(std::span<const std::size_t> dif_items) {
  if (dif_items.size() % 2 != 0) throw std::invalid_argument("symmetric injection needs an even number of DIF items");
}

template <typename Pred>
void shift_where(ParameterMatrix& m, std::size_t item, std::span<const double> x, Pred pred, double amount) {
  if (item >= m.items) throw std::out_of_range("DIF item index out of range");
  for (std::size_t p = 0; p < m.persons; ++p) {
    if (pred(x[p])) m.at(p, item) += amount;
  }
}

const auto is_zero = [](double v) { return v == 0.0; };
const auto is_one = [](double v) { return v == 1.0; };

}  // namespace

std::string_view to_string(CovariateDesign design) {
  switch (design) {
    case CovariateDesign::Binary1: return "binary1";
    case CovariateDesign::Ordinal1: return "ordinal1";
    case CovariateDesign::ThreeCovariates: return "three_covariates";
  }
  return "";
}

std::string_view to_string(DifKind kind) {
  switch (kind) {
    case DifKind::None: return "none";
    case DifKind::UniformBinary: return "uniform_binary";
    case DifKind::UniformOrdinal: return "uniform_ordinal";
    case DifKind::UniformFirstVariable: return "uniform_first_variable";
    case DifKind::UniformComplex: return "uniform_complex";
    case DifKind::NonuniformBinary: return "nonuniform_binary";
    case DifKind::NonuniformMixed: return "nonuniform_mixed";
  }
  return "";
}

std::string_view to_string(DifType type) {
  switch (type) {
    case DifType::None: return "none";
    case DifType::Uniform: return "uniform";
    case DifType::Nonuniform: return "nonuniform";
  }
  return "";
}

CovariateDesign parse_covariate_design(std::string_view text) {
  for (auto d : {CovariateDesign::Binary1, CovariateDesign::Ordinal1, CovariateDesign::ThreeCovariates}) {
    if (text == to_string(d)) return d;
  }
  throw std::invalid_argument("unknown covariate design \"" + std::string(text) + "\"");
}

DifKind parse_dif_kind(std::string_view text) {
  for (auto k : {DifKind::None, DifKind::UniformBinary, DifKind::UniformOrdinal, DifKind::UniformFirstVariable,
                 DifKind::UniformComplex, DifKind::NonuniformBinary, DifKind::NonuniformMixed}) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown DIF kind \"" + std::string(text) + "\"");
}

std::vector<std::size_t> ScenarioSpec::dif_items() const {
  std::size_t k = 0;
  switch (kind) {
    case DifKind::None: k = 0; break;
    case DifKind::UniformComplex: k = 2; break;
    case DifKind::NonuniformMixed: k = 4; break;
    default: k = static_cast<std::size_t>(std::llround(dif_fraction * static_cast<double>(items)));
  }
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = i;
  return out;
}

void ScenarioSpec::validate() const {
  if (persons < 2 || items < 2) throw std::invalid_argument("a scenario needs at least 2 persons and 2 items");
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (dif_fraction < 0.0 || dif_fraction > 1.0) throw std::invalid_argument("dif_fraction must lie in [0, 1]");
  CovariateDesign needed = design;
  switch (kind) {
    case DifKind::None: break;
    case DifKind::UniformBinary:
    case DifKind::NonuniformBinary: needed = CovariateDesign::Binary1; break;
    case DifKind::UniformOrdinal: needed = CovariateDesign::Ordinal1; break;
    case DifKind::UniformFirstVariable:
    case DifKind::UniformComplex:
    case DifKind::NonuniformMixed: needed = CovariateDesign::ThreeCovariates; break;
  }
  if (needed != design) {
    throw std::invalid_argument("DIF kind " + std::string(to_string(kind)) + " requires covariate design " +
                                std::string(to_string(needed)));
  }
  const auto dif = dif_items();
  if (dif.size() > items) throw std::invalid_argument("more DIF items than items");
  const bool symmetric = kind == DifKind::UniformBinary || kind == DifKind::UniformOrdinal ||
                         kind == DifKind::UniformFirstVariable || kind == DifKind::NonuniformBinary;
  if (symmetric && dif.size() % 2 != 0) {
    throw std::invalid_argument("dif_fraction * items must be an even integer for symmetric injection");
  }
}

void to_json(nlohmann::json& j, const ScenarioSpec& s) {
  j = {{"persons", s.persons},           {"items", s.items},
       {"dif_fraction", s.dif_fraction}, {"strength", s.strength},
       {"slope_shift", s.slope_shift},   {"covariate_design", to_string(s.design)},
       {"dif_kind", to_string(s.kind)},  {"replications", s.replications},
       {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, ScenarioSpec& s) {
  ScenarioSpec d;
  s.persons = j.value("persons", d.persons);
  s.items = j.value("items", d.items);
  s.dif_fraction = j.value("dif_fraction", d.dif_fraction);
  s.strength = j.value("strength", d.strength);
  s.slope_shift = j.value("slope_shift", d.slope_shift);
  s.design = parse_covariate_design(j.value("covariate_design", std::string(to_string(d.design))));
  s.kind = parse_dif_kind(j.value("dif_kind", std::string(to_string(d.kind))));
  s.replications = j.value("replications", d.replications);
  s.seed = j.value("seed", d.seed);
}

GroundTruth::GroundTruth(std::size_t items_, std::size_t variables_)
    : items(items_), variables(variables_), delta(items_ * variables_, 0), type(items_, DifType::None) {}

void GroundTruth::set(std::size_t i, std::size_t j, DifType t) {
  delta[i * variables + j] = 1;
  if (type[i] != DifType::Nonuniform) type[i] = t;
}

bool GroundTruth::has_dif(std::size_t i) const {
  for (std::size_t j = 0; j < variables; ++j) {
    if (at(i, j)) return true;
  }
  return false;
}

void to_json(nlohmann::json& j, const GroundTruth& t) {
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json types = nlohmann::json::array();
  for (std::size_t i = 0; i < t.items; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t v = 0; v < t.variables; ++v) row.push_back(t.at(i, v) ? 1 : 0);
    rows.push_back(row);
    types.push_back(to_string(t.type[i]));
  }
  j = {{"items", t.items}, {"variables", t.variables}, {"delta", rows}, {"dif_type", types}};
}

void from_json(const nlohmann::json& j, GroundTruth& t) {
  t = GroundTruth(j.at("items").get<std::size_t>(), j.at("variables").get<std::size_t>());
  const auto& rows = j.at("delta");
  const auto& types = j.at("dif_type");
  if (rows.size() != t.items || types.size() != t.items) throw DataError("truth file: row count mismatch");
  for (std::size_t i = 0; i < t.items; ++i) {
    if (rows[i].size() != t.variables) throw DataError("truth file: column count mismatch");
    for (std::size_t v = 0; v < t.variables; ++v) t.delta[i * t.variables + v] = rows[i][v].get<int>() != 0;
    const auto name = types[i].get<std::string>();
    if (name == "none") t.type[i] = DifType::None;
    else if (name == "uniform") t.type[i] = DifType::Uniform;
    else if (name == "nonuniform") t.type[i] = DifType::Nonuniform;
    else throw DataError("truth file: unknown dif_type \"" + name + "\"");
  }
}

ParameterMatrix ParameterMatrix::broadcast(std::span<const double> per_item, std::size_t persons) {
  ParameterMatrix m;
  m.persons = persons;
  m.items = per_item.size();
  m.values.resize(persons * per_item.size());
  for (std::size_t p = 0; p < persons; ++p) {
    std::copy(per_item.begin(), per_item.end(), m.values.begin() + static_cast<std::ptrdiff_t>(p * m.items));
  }
  return m;
}

SimulationStreams::SimulationStreams(std::uint64_t seed)
    : theta(derive_key(seed, {kThetaStream})),
      difficulty(derive_key(seed, {kDifficultyStream})),
      discrimination(derive_key(seed, {kDiscriminationStream})),
      responses(derive_key(seed, {kResponseStream})),
      covariates(derive_key(seed, {kCovariateStream})) {}

std::vector<double> draw_abilities(std::size_t persons, std::uint64_t seed) {
  return normals(persons, SimulationStreams(seed).theta);
}

std::vector<double> draw_difficulties(std::size_t items, std::uint64_t seed) {
  return normals(items, SimulationStreams(seed).difficulty);
}

std::vector<double> draw_discriminations(std::size_t items, std::uint64_t seed) {
  const auto key = SimulationStreams(seed).discrimination;
  std::vector<double> a(items);
  for (std::size_t i = 0; i < items; ++i) a[i] = CounterRng::uniform_at(key, i);
  return a;
}

double icc_2pl(double theta, double a, double b) { return 1.0 / (1.0 + std::exp(-a * (theta - b))); }

ResponseMatrix generate_responses(std::span<const double> theta, const ParameterMatrix& a, const ParameterMatrix& b,
                                  std::uint64_t seed) {
  if (a.persons != theta.size() || b.persons != theta.size() || a.items != b.items) {
    throw std::invalid_argument("parameter matrix shapes disagree");
  }
  const std::size_t P = theta.size();
  const std::size_t I = a.items;
  const auto key = SimulationStreams(seed).responses;
  std::vector<std::uint8_t> y(P * I);
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t i = 0; i < I; ++i) {
      y[p * I + i] = CounterRng::uniform_at(key, p * I + i) < icc_2pl(theta[p], a.at(p, i), b.at(p, i)) ? 1 : 0;
    }
  }
  std::vector<std::string> names(I);
  for (std::size_t i = 0; i < I; ++i) names[i] = "i" + std::to_string(i + 1);
  return ResponseMatrix(std::move(names), P, std::move(y));
}

Generated2pl gen_2pl(std::size_t persons, std::size_t items, std::uint64_t seed) {
  Generated2pl g;
  g.theta = draw_abilities(persons, seed);
  g.a = draw_discriminations(items, seed);
  g.b = draw_difficulties(items, seed);
  g.responses = generate_responses(g.theta, ParameterMatrix::broadcast(g.a, persons),
                                   ParameterMatrix::broadcast(g.b, persons), seed);
  return g;
}

CovariateTable draw_covariates(CovariateDesign design, std::size_t persons, std::uint64_t seed) {
  const auto base = SimulationStreams(seed).covariates;
  auto binary = [&](std::size_t j) {
    const auto key = derive_key(base, {j});
    std::vector<double> x(persons);
    for (std::size_t p = 0; p < persons; ++p) x[p] = CounterRng::uniform_at(key, p) < 0.5 ? 1.0 : 0.0;
    return x;
  };
  switch (design) {
    case CovariateDesign::Binary1:
      return CovariateTable({{"x", Scale::Binary}}, {binary(0)});
    case CovariateDesign::Ordinal1: {
      const auto key = derive_key(base, {0});
      std::vector<double> x(persons);
      for (std::size_t p = 0; p < persons; ++p) x[p] = 1.0 + static_cast<double>(CounterRng(key, p).below(6));
      return CovariateTable({{"x", Scale::Ordinal}}, {std::move(x)});
    }
    case CovariateDesign::ThreeCovariates:
      return CovariateTable({{"x1", Scale::Binary}, {"x2", Scale::Binary}, {"x3", Scale::Continuous}},
                            {binary(0), binary(1), normals(persons, derive_key(base, {2}))});
  }
  throw std::invalid_argument("unknown covariate design");
}

ParameterMatrix inject_uniform_binary(ParameterMatrix b, std::span<const double> x, double c,
                                      std::span<const std::size_t> dif_items) {
  check_persons(b, x);
  check_symmetric(dif_items);
  const std::size_t half = dif_items.size() / 2;
  for (std::size_t k = 0; k < dif_items.size(); ++k) {
    if (k < half) shift_where(b, dif_items[k], x, is_zero, c);
    else shift_where(b, dif_items[k], x, is_one, c);
  }
  return b;
}

ParameterMatrix inject_uniform_ordinal(ParameterMatrix b, std::span<const double> x, double c,
                                       std::span<const std::size_t> dif_items) {
  check_persons(b, x);
  check_symmetric(dif_items);
  const std::size_t half = dif_items.size() / 2;
  for (std::size_t k = 0; k < dif_items.size(); ++k) {
    if (k < half) shift_where(b, dif_items[k], x, [](double v) { return v > 3.0; }, c);
    else shift_where(b, dif_items[k], x, [](double v) { return v <= 3.0; }, c);
  }
  return b;
}

ParameterMatrix inject_uniform_complex(ParameterMatrix b, std::size_t item, std::span<const double> xk,
                                       std::span<const double> x3, double c) {
  check_persons(b, xk);
  check_persons(b, x3);
  if (item >= b.items) throw std::out_of_range("DIF item index out of range");
  for (std::size_t p = 0; p < b.persons; ++p) {
    if (x3[p] > 0.0) b.at(p, item) += c + (xk[p] == 0.0 ? c : 0.0);
  }
  return b;
}

ParameterMatrix inject_nonuniform(ParameterMatrix a, std::span<const double> x, double shift,
                                  std::span<const std::size_t> dif_items) {
  check_persons(a, x);
  check_symmetric(dif_items);
  const std::size_t half = dif_items.size() / 2;
  for (std::size_t k = 0; k < dif_items.size(); ++k) {
    if (k < half) shift_where(a, dif_items[k], x, is_zero, shift);
    else shift_where(a, dif_items[k], x, is_one, shift);
  }
  return a;
}

SimulatedDataset simulate(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t P = spec.persons;
  const std::size_t I = spec.items;
  const auto theta = draw_abilities(P, seed);
  const auto a0 = draw_discriminations(I, seed);
  const auto b0 = draw_difficulties(I, seed);
  CovariateTable cov = draw_covariates(spec.design, P, seed);
  ParameterMatrix a = ParameterMatrix::broadcast(a0, P);
  ParameterMatrix b = ParameterMatrix::broadcast(b0, P);
  GroundTruth truth(I, cov.variables());
  const auto dif = spec.dif_items();

  switch (spec.kind) {
    case DifKind::None:
      break;
    case DifKind::UniformBinary:
    case DifKind::UniformFirstVariable:
      b = inject_uniform_binary(std::move(b), cov.column(0), spec.strength, dif);
      for (auto i : dif) truth.set(i, 0, DifType::Uniform);
      break;
    case DifKind::UniformOrdinal:
      b = inject_uniform_ordinal(std::move(b), cov.column(0), spec.strength, dif);
      for (auto i : dif) truth.set(i, 0, DifType::Uniform);
      break;
    case DifKind::UniformComplex:
      b = inject_uniform_complex(std::move(b), 0, cov.column(0), cov.column(2), spec.strength);
      b = inject_uniform_complex(std::move(b), 1, cov.column(1), cov.column(2), spec.strength);
      truth.set(0, 0, DifType::Uniform);
      truth.set(0, 2, DifType::Uniform);
      truth.set(1, 1, DifType::Uniform);
      truth.set(1, 2, DifType::Uniform);
      break;
    case DifKind::NonuniformBinary:
      a = inject_nonuniform(std::move(a), cov.column(0), spec.slope_shift, dif);
      for (auto i : dif) truth.set(i, 0, DifType::Nonuniform);
      break;
    case DifKind::NonuniformMixed:
      shift_where(a, 0, cov.column(0), is_one, spec.slope_shift);
      shift_where(a, 1, cov.column(1), is_zero, spec.slope_shift);
      shift_where(b, 2, cov.column(0), is_one, spec.strength);
      shift_where(b, 3, cov.column(1), is_zero, spec.strength);
      truth.set(0, 0, DifType::Nonuniform);
      truth.set(1, 1, DifType::Nonuniform);
      truth.set(2, 0, DifType::Uniform);
      truth.set(3, 1, DifType::Uniform);
      break;
  }

  SimulatedDataset out;
  out.data = Dataset(generate_responses(theta, a, b, seed), std::move(cov));
  out.truth = std::move(truth);
  return out;
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication) {
  return derive_key(seed, {kReplicationStream, replication});
}

std::vector<SimulatedDataset> run_scenario(const ScenarioSpec& spec) {
  spec.validate();
  std::vector<SimulatedDataset> out(spec.replications);
  std::vector<std::exception_ptr> errors(spec.replications);
  const auto n = static_cast<std::ptrdiff_t>(spec.replications);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    try {
      out[r] = simulate(spec, replication_seed(spec.seed, static_cast<std::size_t>(r)));
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace ift
