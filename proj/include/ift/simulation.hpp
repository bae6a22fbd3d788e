#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ift/data.hpp"
#include "json.hpp"

namespace ift {

enum class CovariateDesign { Binary1, Ordinal1, ThreeCovariates };
enum class DifKind {
  None,
  UniformBinary,         // b + c I(x=0) / b + c I(x=1) on a binary x
  UniformOrdinal,        // b + c I(x>3) / b + c I(x<=3) on x in 1..6
  UniformFirstVariable,  // binary injection through x1 of the three-covariate design
  UniformComplex,        // two items, step functions in (x1, x3) and (x2, x3)
  NonuniformBinary,      // a + shift I(x=0) / a + shift I(x=1)
  NonuniformMixed,       // items 1-2 slope DIF, items 3-4 intercept DIF
};
enum class DifType { None, Uniform, Nonuniform };

std::string_view to_string(CovariateDesign design);
std::string_view to_string(DifKind kind);
std::string_view to_string(DifType type);
CovariateDesign parse_covariate_design(std::string_view text);
DifKind parse_dif_kind(std::string_view text);

struct ScenarioSpec {
  std::size_t persons = 400;
  std::size_t items = 20;
  double dif_fraction = 0.0;  // ignored by the complex and mixed kinds
  double strength = 1.6;      // difficulty shift c
  double slope_shift = 0.6;   // discrimination shift
  CovariateDesign design = CovariateDesign::Binary1;
  DifKind kind = DifKind::None;
  std::size_t replications = 1;
  std::uint64_t seed = 1;

  // Indices of the DIF items, ascending.
  std::vector<std::size_t> dif_items() const;
  void validate() const;

  bool operator==(const ScenarioSpec&) const = default;
};

void to_json(nlohmann::json& j, const ScenarioSpec& spec);
void from_json(const nlohmann::json& j, ScenarioSpec& spec);

struct GroundTruth {
  std::size_t items = 0;
  std::size_t variables = 0;
  std::vector<std::uint8_t> delta;  // items x variables, row-major
  std::vector<DifType> type;

  GroundTruth() = default;
  GroundTruth(std::size_t items, std::size_t variables);
  bool at(std::size_t i, std::size_t j) const { return delta[i * variables + j] != 0; }
  void set(std::size_t i, std::size_t j, DifType t);
  bool has_dif(std::size_t i) const;

  bool operator==(const GroundTruth&) const = default;
};

void to_json(nlohmann::json& j, const GroundTruth& truth);
void from_json(const nlohmann::json& j, GroundTruth& truth);

// Person-specific item parameters, persons x items, row-major.
struct ParameterMatrix {
  std::size_t persons = 0;
  std::size_t items = 0;
  std::vector<double> values;

  static ParameterMatrix broadcast(std::span<const double> per_item, std::size_t persons);
  double& at(std::size_t p, std::size_t i) { return values[p * items + i]; }
  double at(std::size_t p, std::size_t i) const { return values[p * items + i]; }
};

struct Generated2pl {
  ResponseMatrix responses;
  std::vector<double> theta;
  std::vector<double> a;
  std::vector<double> b;
};

// Independent draw streams of one generated dataset.
struct SimulationStreams {
  std::uint64_t theta, difficulty, discrimination, responses;
  std::uint64_t covariates;  // per variable j: derive_key(covariates, {j})

  explicit SimulationStreams(std::uint64_t seed);
};

std::vector<double> draw_abilities(std::size_t persons, std::uint64_t seed);
std::vector<double> draw_difficulties(std::size_t items, std::uint64_t seed);
std::vector<double> draw_discriminations(std::size_t items, std::uint64_t seed);

double icc_2pl(double theta, double a, double b);

// Bernoulli responses from person-specific parameters.
ResponseMatrix generate_responses(std::span<const double> theta, const ParameterMatrix& a, const ParameterMatrix& b,
                                  std::uint64_t seed);

// theta ~ N(0,1), b ~ N(0,1), a ~ U(0,1).
Generated2pl gen_2pl(std::size_t persons, std::size_t items, std::uint64_t seed);

CovariateTable draw_covariates(CovariateDesign design, std::size_t persons, std::uint64_t seed);

// Symmetric injections: the first half of `dif_items` (ascending) is shifted
// in one group, the second half in the other.
ParameterMatrix inject_uniform_binary(ParameterMatrix b, std::span<const double> x, double c,
                                      std::span<const std::size_t> dif_items);
ParameterMatrix inject_uniform_ordinal(ParameterMatrix b, std::span<const double> x, double c,
                                       std::span<const std::size_t> dif_items);
// b + c I(x3>0) + c I(x3>0, xk=0) for one item.
ParameterMatrix inject_uniform_complex(ParameterMatrix b, std::size_t item, std::span<const double> xk,
                                       std::span<const double> x3, double c);
ParameterMatrix inject_nonuniform(ParameterMatrix a, std::span<const double> x, double shift,
                                  std::span<const std::size_t> dif_items);

struct SimulatedDataset {
  Dataset data;
  GroundTruth truth;
};

// One dataset of the scenario from an explicit seed.
SimulatedDataset simulate(const ScenarioSpec& spec, std::uint64_t seed);

std::uint64_t replication_seed(std::uint64_t seed, std::size_t replication);

// Replication r is simulated from replication_seed(spec.seed, r).
std::vector<SimulatedDataset> run_scenario(const ScenarioSpec& spec);

}  // namespace ift
