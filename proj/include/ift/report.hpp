#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ift/experiment.hpp"
#include "json.hpp"

namespace ift {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

// Settings of one fit run. Mirrors the command-line flags one to one.
struct RunConfig {
  Method method = Method::Ift;
  Strategy strategy = Strategy::Udif;
  double alpha = 0.05;
  int permutations = 1000;
  std::size_t min_node = 30;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: all available
  std::string responses, covariates, schema, out;
  bool rest_score = false;
  bool standardize = false;
  bool per_item_stopping = false;
  std::string group_variable;

  void validate() const;
  MethodConfig method_config() const;

  bool operator==(const RunConfig&) const = default;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

enum class Verdict { None, Uniform, NonUniform, Undetermined };
std::string_view to_string(Verdict verdict);
Verdict parse_verdict(std::string_view text);

struct ItemReport {
  std::size_t item = 0;
  std::string name;
  Verdict verdict = Verdict::None;
  std::vector<std::string> variables;  // responsible covariates
  std::optional<ItemTree> tree;         // tree methods
  std::optional<ItemTestResult> test;   // logistic baselines
};

struct DifReport {
  int schema_version = kReportSchemaVersion;
  std::string version = std::string(kToolVersion);
  RunConfig config;
  std::vector<VariableSpec> variables;
  std::vector<ItemReport> items;
  std::vector<TrailStep> trail;
};

Verdict item_verdict(const ItemTree& tree, Strategy strategy);
Verdict item_verdict(const ItemTestResult& test, double alpha);

DifReport make_report(const Dataset& data, const RunConfig& config, const MethodRun& run);

nlohmann::json to_json(const DifReport& report);
DifReport report_from_json(const nlohmann::json& j);

nlohmann::json tree_to_json(const ComponentTree& tree);
ComponentTree tree_from_json(const nlohmann::json& j);
nlohmann::json item_tree_to_json(const ItemTree& tree);
ItemTree item_tree_from_json(const nlohmann::json& j);

enum class TreeFormat { Ascii, Json, Dot };
TreeFormat parse_tree_format(std::string_view text);

std::string render_tree(const ItemTree& tree, TreeFormat format, const std::vector<VariableSpec>& variables,
                        std::string_view item_name);

}  // namespace ift
