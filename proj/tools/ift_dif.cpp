// Command-line front end: fit, simulate, evaluate, bench, render-tree.

#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ift/error.hpp"
#include "ift/evaluation.hpp"
#include "ift/experiment.hpp"
#include "ift/report.hpp"
#include "ift/simulation.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Reads JSON config files (an object whose keys are flag names) and falls
// back to TOML otherwise. Top-level keys are routed to `subcommand`.
class JsonOrTomlConfig : public CLI::ConfigTOML {
 public:
  std::string subcommand;

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = parse(input);
    if (!subcommand.empty()) {
      for (auto& item : items) {
        if (item.parents.empty() || item.parents.front() != subcommand) {
          item.parents.insert(item.parents.begin(), subcommand);
        }
      }
    }
    return items;
  }

 private:
  std::vector<CLI::ConfigItem> parse(std::istream& input) const {
    std::stringstream buffer;
    buffer << input.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream again(text);
      return CLI::ConfigTOML::from_config(again);
    }
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError("config", e.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto p = parents;
        p.push_back(key);
        flatten(value, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      out.push_back(std::move(item));
    }
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ift::DataError("cannot write " + path.string());
  os << text;
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ift::DataError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ift::DataError(path.string() + ": " + e.what());
  }
}

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

template <typename Enum, typename Parse>
CLI::Option* add_enum(CLI::App* app, const std::string& name, Enum& target, Parse parse, const std::string& help) {
  return app->add_option_function<std::string>(name, [&target, parse](const std::string& s) { target = parse(s); },
                                                help);
}

// ---------------------------------------------------------------------------

struct FitCommand {
  ift::RunConfig config;
  std::string method = "ift";
  std::string strategy = "udif";

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("fit", "Detect DIF in a dataset");
    app->add_option("--responses", config.responses, "Response CSV (header = item names)")->required();
    app->add_option("--covariates", config.covariates, "Covariate CSV")->required();
    app->add_option("--schema", config.schema, "Covariate schema JSON")->required();
    app->add_option("--method", method, "ift, logistic-classical or logistic-extended")->capture_default_str();
    app->add_option("--strategy", strategy, "udif, dif or nudif")->capture_default_str();
    app->add_option("--alpha", config.alpha, "Significance level")->capture_default_str();
    app->add_option("--permutations", config.permutations, "Permutations per test")->capture_default_str();
    app->add_option("--min-node", config.min_node, "Minimum persons per node")->capture_default_str();
    app->add_option("--seed", config.seed, "Random seed")->capture_default_str();
    app->add_option("--threads", config.threads, "Worker threads (0 = all)")->capture_default_str();
    app->add_option("--out", config.out, "Output directory")->required();
    app->add_option("--group-variable", config.group_variable, "Grouping variable of logistic-classical");
    app->add_flag("--rest-score", config.rest_score, "Exclude the studied item from its score");
    app->add_flag("--standardize", config.standardize, "Divide scores by the number of items");
    app->add_flag("--per-item-stopping", config.per_item_stopping,
                  "Close only the tested item when a test fails instead of stopping");
    app->callback([this] { run(); });
  }

  void run() {
    config.method = ift::parse_method(method);
    config.strategy = ift::parse_strategy(strategy);
    config.validate();
    set_threads(config.threads);

    const ift::ResponseMatrix responses = ift::load_responses(config.responses);
    const ift::CovariateTable covariates = ift::load_covariates(config.covariates, config.schema);
    const ift::Dataset data(responses, covariates);
    const ift::MethodRun result = ift::run_method(data, config.method_config());
    const ift::DifReport report = ift::make_report(data, config, result);

    const fs::path out(config.out);
    fs::create_directories(out);
    write_text(out / "report.json", ift::to_json(report).dump(2) + "\n");
    if (result.growth) {
      fs::create_directories(out / "trees");
      for (const auto& item : report.items) {
        if (!item.tree || !item.tree->has_dif()) continue;
        const auto& vars = report.variables;
        write_text(out / "trees" / (item.name + ".txt"), ift::render_tree(*item.tree, ift::TreeFormat::Ascii, vars, item.name));
        write_text(out / "trees" / (item.name + ".dot"), ift::render_tree(*item.tree, ift::TreeFormat::Dot, vars, item.name));
        write_text(out / "trees" / (item.name + ".json"), ift::render_tree(*item.tree, ift::TreeFormat::Json, vars, item.name));
      }
    }
    std::size_t flagged = 0;
    for (const auto& item : report.items) {
      if (item.verdict == ift::Verdict::None) continue;
      ++flagged;
      std::cout << item.name << ": " << ift::to_string(item.verdict);
      for (const auto& v : item.variables) std::cout << " " << v;
      std::cout << "\n";
    }
    std::cout << flagged << " of " << report.items.size() << " items flagged; report written to "
              << (out / "report.json").string() << "\n";
  }
};

// ---------------------------------------------------------------------------

void add_scenario_options(CLI::App* app, ift::ScenarioSpec& s, std::string& design, std::string& kind) {
  app->add_option("--persons", s.persons, "Persons P")->capture_default_str();
  app->add_option("--items", s.items, "Items I")->capture_default_str();
  app->add_option("--dif-fraction", s.dif_fraction, "Share of DIF items")->capture_default_str();
  app->add_option("--strength", s.strength, "Difficulty shift c")->capture_default_str();
  app->add_option("--slope-shift", s.slope_shift, "Discrimination shift")->capture_default_str();
  app->add_option("--design", design, "binary1, ordinal1 or three_covariates")->capture_default_str();
  app->add_option("--kind", kind,
                  "none, uniform_binary, uniform_ordinal, uniform_first_variable, uniform_complex, "
                  "nonuniform_binary or nonuniform_mixed")
      ->capture_default_str();
  app->add_option("--replications", s.replications, "Number of datasets")->capture_default_str();
  app->add_option("--seed", s.seed, "Random seed")->capture_default_str();
}

struct SimulateCommand {
  ift::ScenarioSpec spec;
  std::string design = "binary1";
  std::string kind = "none";
  std::string out;
  int threads = 0;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("simulate", "Generate 2PL datasets with injected DIF");
    add_scenario_options(app, spec, design, kind);
    app->add_option("--threads", threads, "Worker threads (0 = all)");
    app->add_option("--out", out, "Output directory")->required();
    app->callback([this] { run(); });
  }

  void run() {
    spec.design = ift::parse_covariate_design(design);
    spec.kind = ift::parse_dif_kind(kind);
    set_threads(threads);
    const auto datasets = ift::run_scenario(spec);
    const fs::path root(out);
    fs::create_directories(root);
    write_text(root / "scenario.json", json(spec).dump(2) + "\n");
    for (std::size_t r = 0; r < datasets.size(); ++r) {
      char name[32];
      std::snprintf(name, sizeof(name), "rep%04zu", r + 1);
      const fs::path dir = root / name;
      fs::create_directories(dir);
      ift::save_responses(datasets[r].data.responses, dir / "responses.csv");
      ift::save_covariates(datasets[r].data.covariates, dir / "covariates.csv");
      ift::save_schema(datasets[r].data.covariates.specs(), dir / "schema.json");
      write_text(dir / "truth.json", json(datasets[r].truth).dump(2) + "\n");
    }
    std::cout << datasets.size() << " dataset(s) written to " << root.string() << "\n";
  }
};

// ---------------------------------------------------------------------------

std::string csv_value(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(10);
  os << *v;
  return os.str();
}

// Detector recorded in a report: item tests or the tree trail.
ift::AlphaDetector detector_from_report(const ift::DifReport& report) {
  ift::AlphaDetector d;
  d.items = report.items.size();
  d.variables = report.variables.size();
  bool tests = false;
  for (const auto& item : report.items) {
    if (item.test) {
      d.tests.push_back(*item.test);
      tests = true;
    }
  }
  if (tests) {
    d.kind = ift::AlphaDetector::Kind::Tests;
  } else {
    d.kind = ift::AlphaDetector::Kind::Trail;
    d.trail = report.trail;
  }
  return d;
}

struct EvaluateCommand {
  std::vector<std::string> truths;
  std::vector<std::string> reports;
  std::string out;
  double alpha = -1.0;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("evaluate", "Score reports against ground truth");
    app->add_option("--truth", truths, "truth.json files")->required();
    app->add_option("--report", reports, "report.json files, paired with --truth in order")->required();
    app->add_option("--alpha", alpha, "Significance level (default: the level stored in each report)");
    app->add_option("--out", out, "Output directory")->required();
    app->callback([this] { run(); });
  }

  void run() {
    if (truths.size() != reports.size()) throw CLI::ValidationError("--truth and --report must be given in pairs");
    std::vector<ift::GroundTruth> gt;
    std::vector<ift::AlphaDetector> detectors;
    std::vector<ift::Metrics> metrics;
    std::ostringstream csv;
    csv << "replication,tpr_item,fpr_item,tpr_item_variable,fpr_item_variable\n";
    for (std::size_t r = 0; r < truths.size(); ++r) {
      gt.push_back(read_json(truths[r]).get<ift::GroundTruth>());
      const ift::DifReport report = ift::report_from_json(read_json(reports[r]));
      detectors.push_back(detector_from_report(report));
      const double a = alpha > 0.0 ? alpha : report.config.alpha;
      ift::DetectionResult det = detectors.back().at(a);
      metrics.push_back(ift::compute_metrics(gt.back(), det));
      const auto& m = metrics.back();
      csv << r + 1 << "," << csv_value(m.tpr_item) << "," << csv_value(m.fpr_item) << ","
          << csv_value(m.tpr_item_variable) << "," << csv_value(m.fpr_item_variable) << "\n";
    }
    const auto s = ift::aggregate(metrics);
    auto mean = [](const ift::Summary& x) { return x.count ? std::optional<double>(x.mean) : std::nullopt; };
    csv << "mean," << csv_value(mean(s.tpr_item)) << "," << csv_value(mean(s.fpr_item)) << ","
        << csv_value(mean(s.tpr_item_variable)) << "," << csv_value(mean(s.fpr_item_variable)) << "\n";

    const auto grid = ift::default_alpha_grid();
    const auto roc = ift::roc_curve(gt, detectors, grid);
    std::ostringstream roc_csv;
    roc_csv.precision(10);
    roc_csv << "alpha,fpr_item,tpr_item\n";
    for (const auto& p : roc) roc_csv << p.alpha << "," << p.fpr << "," << p.tpr << "\n";

    const fs::path dir(out);
    fs::create_directories(dir);
    write_text(dir / "metrics.csv", csv.str());
    write_text(dir / "roc.csv", roc_csv.str());
    std::cout << "metrics.csv and roc.csv written to " << dir.string() << " (AUC " << ift::roc_auc(roc) << ")\n";
  }
};

// ---------------------------------------------------------------------------

struct BenchCommand {
  ift::ScenarioSpec base;
  std::string design = "binary1";
  std::string kind = "none";
  std::vector<std::size_t> persons_grid;
  std::vector<std::size_t> items_grid;
  std::vector<double> fraction_grid;
  std::vector<double> strength_grid;
  std::vector<std::string> methods{"ift:udif", "logistic-extended:udif"};
  double alpha = 0.05;
  int permutations = 200;
  std::size_t min_node = 30;
  int threads = 0;
  bool roc = false;
  std::string out;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("bench", "Simulate, fit and evaluate over a scenario grid");
    add_scenario_options(app, base, design, kind);
    app->add_option("--persons-grid", persons_grid, "Values of P to sweep");
    app->add_option("--items-grid", items_grid, "Values of I to sweep");
    app->add_option("--dif-fraction-grid", fraction_grid, "DIF shares to sweep");
    app->add_option("--strength-grid", strength_grid, "Values of c to sweep");
    app->add_option("--methods", methods, "method:strategy pairs")->capture_default_str();
    app->add_option("--alpha", alpha, "Significance level")->capture_default_str();
    app->add_option("--permutations", permutations, "Permutations per test")->capture_default_str();
    app->add_option("--min-node", min_node, "Minimum persons per node")->capture_default_str();
    app->add_option("--threads", threads, "Worker threads (0 = all)");
    app->add_flag("--roc", roc, "Trace ROC curves and report AUC");
    app->add_option("--out", out, "Output directory")->required();
    app->callback([this] { run(); });
  }

  void run() {
    base.design = ift::parse_covariate_design(design);
    base.kind = ift::parse_dif_kind(kind);
    set_threads(threads);
    if (persons_grid.empty()) persons_grid = {base.persons};
    if (items_grid.empty()) items_grid = {base.items};
    if (fraction_grid.empty()) fraction_grid = {base.dif_fraction};
    if (strength_grid.empty()) strength_grid = {base.strength};

    std::ostringstream table, roc_csv;
    table.precision(6);
    roc_csv.precision(10);
    table << "persons,items,dif_fraction,strength,kind,method,strategy,replications,"
             "tpr_item,fpr_item,tpr_item_variable,fpr_item_variable,tpr_item_q1,tpr_item_q3,fpr_item_q1,fpr_item_q3,auc\n";
    roc_csv << "persons,items,dif_fraction,strength,method,strategy,alpha,fpr_item,tpr_item\n";
    for (auto P : persons_grid) {
      for (auto I : items_grid) {
        for (auto f : fraction_grid) {
          for (auto c : strength_grid) {
            ift::ScenarioSpec spec = base;
            spec.persons = P;
            spec.items = I;
            spec.dif_fraction = f;
            spec.strength = c;
            for (const auto& entry : methods) {
              const auto colon = entry.find(':');
              ift::MethodConfig mc;
              mc.method = ift::parse_method(entry.substr(0, colon));
              mc.strategy = colon == std::string::npos ? ift::Strategy::Udif : ift::parse_strategy(entry.substr(colon + 1));
              mc.grow.alpha = alpha;
              mc.grow.permutations = permutations;
              mc.grow.min_node = min_node;
              const auto res = ift::run_experiment(spec, mc, roc);
              const auto& s = res.summary;
              auto mean = [](const ift::Summary& x) { return x.count ? std::optional<double>(x.mean) : std::nullopt; };
              table << P << "," << I << "," << f << "," << c << "," << ift::to_string(spec.kind) << ","
                    << ift::to_string(mc.method) << "," << ift::to_string(mc.strategy) << "," << spec.replications
                    << "," << csv_value(mean(s.tpr_item)) << "," << csv_value(mean(s.fpr_item)) << ","
                    << csv_value(mean(s.tpr_item_variable)) << "," << csv_value(mean(s.fpr_item_variable)) << ","
                    << (s.tpr_item.count ? csv_value(s.tpr_item.q1) : "") << ","
                    << (s.tpr_item.count ? csv_value(s.tpr_item.q3) : "") << ","
                    << (s.fpr_item.count ? csv_value(s.fpr_item.q1) : "") << ","
                    << (s.fpr_item.count ? csv_value(s.fpr_item.q3) : "") << "," << (roc ? csv_value(res.auc) : "")
                    << "\n";
              for (const auto& p : res.roc) {
                roc_csv << P << "," << I << "," << f << "," << c << "," << ift::to_string(mc.method) << ","
                        << ift::to_string(mc.strategy) << "," << p.alpha << "," << p.fpr << "," << p.tpr << "\n";
              }
              std::cerr << "done P=" << P << " I=" << I << " f=" << f << " c=" << c << " " << entry << "\n";
            }
          }
        }
      }
    }
    const fs::path dir(out);
    fs::create_directories(dir);
    write_text(dir / "metrics.csv", table.str());
    if (roc) write_text(dir / "roc.csv", roc_csv.str());
    std::cout << table.str();
  }
};

// ---------------------------------------------------------------------------

struct RenderTreeCommand {
  std::string report_path;
  std::string item;
  std::string format = "ascii";

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("render-tree", "Print the tree of one item from a report");
    app->add_option("--report", report_path, "report.json")->required();
    app->add_option("--item", item, "Item name or 1-based index")->required();
    app->add_option("--format", format, "ascii, json or dot")->capture_default_str();
    app->callback([this] { run(); });
  }

  void run() {
    const ift::TreeFormat fmt = ift::parse_tree_format(format);
    const ift::DifReport report = ift::report_from_json(read_json(report_path));
    for (const auto& entry : report.items) {
      if (entry.name != item && std::to_string(entry.item + 1) != item) continue;
      if (!entry.tree) throw ift::DataError("item " + item + " has no tree (report of a logistic method)");
      std::cout << ift::render_tree(*entry.tree, fmt, report.variables, entry.name);
      return;
    }
    throw ift::DataError("item " + item + " not found in " + report_path);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Item-focussed tree and logistic-regression DIF detection"};
  auto formatter = std::make_shared<JsonOrTomlConfig>();
  app.config_formatter(formatter);
  app.set_config("--config", "", "JSON or TOML file mirroring the subcommand flags (flags override it)");
  app.fallthrough();
  app.require_subcommand(1);
  FitCommand fit;
  SimulateCommand simulate;
  EvaluateCommand evaluate;
  BenchCommand bench;
  RenderTreeCommand render;
  fit.add(app);
  simulate.add(app);
  evaluate.add(app);
  bench.add(app);
  render.add(app);

  for (int i = 1; i < argc; ++i) {
    if (app.get_subcommand_no_throw(argv[i]) != nullptr) {
      formatter->subcommand = argv[i];
      break;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const ift::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ift::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
