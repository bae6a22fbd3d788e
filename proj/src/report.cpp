#include "ift/report.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "ift/error.hpp"

namespace ift {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string variable_name(const std::vector<VariableSpec>& variables, std::size_t j) {
  return j < variables.size() ? variables[j].name : "x" + std::to_string(j + 1);
}

json trail_step_to_json(const TrailStep& s) {
  return {{"iteration", s.iteration},
          {"item", s.item},
          {"variable", s.variable},
          {"cell", s.cell},
          {"component", to_string(s.component)},
          {"threshold", s.threshold},
          {"statistic", s.statistic},
          {"p_value", s.p_value},
          {"accepted", s.accepted},
          {"joint_log_likelihood", s.joint_log_likelihood}};
}

TrailStep trail_step_from_json(const json& j) {
  TrailStep s;
  s.iteration = j.at("iteration").get<int>();
  s.item = j.at("item").get<std::size_t>();
  s.variable = j.at("variable").get<std::size_t>();
  s.cell = j.at("cell").get<int>();
  s.component = parse_component(j.at("component").get<std::string>());
  s.threshold = j.at("threshold").get<double>();
  s.statistic = j.at("statistic").get<double>();
  s.p_value = j.at("p_value").get<double>();
  s.accepted = j.at("accepted").get<bool>();
  s.joint_log_likelihood = j.at("joint_log_likelihood").get<double>();
  return s;
}

json test_to_json(const ItemTestResult& t) {
  json coef = json::array();
  for (std::size_t k = 0; k < t.parameters.size(); ++k) {
    coef.push_back({{"name", t.parameter_names[k]}, {"value", t.parameters[k]}});
  }
  return {{"strategy", to_string(t.strategy)},
          {"statistic", t.lr.statistic},
          {"df", t.lr.df},
          {"p_value", t.lr.p_value},
          {"flagged", t.flagged},
          {"separation", t.separation},
          {"coefficients", coef}};
}

ItemTestResult test_from_json(const json& j, std::size_t item) {
  ItemTestResult t;
  t.item = item;
  t.strategy = parse_strategy(j.at("strategy").get<std::string>());
  t.lr.statistic = j.at("statistic").get<double>();
  t.lr.df = j.at("df").get<int>();
  t.lr.p_value = j.at("p_value").get<double>();
  t.flagged = j.at("flagged").get<bool>();
  t.separation = j.value("separation", false);
  for (const auto& c : j.at("coefficients")) {
    t.parameter_names.push_back(c.at("name").get<std::string>());
    t.parameters.push_back(c.at("value").get<double>());
  }
  return t;
}

// Ascii rendering of one component, indented two spaces per level.
void ascii_node(const ComponentTree& tree, int index, const std::vector<VariableSpec>& variables,
                std::string_view label, int depth, std::ostringstream& os) {
  const auto& node = tree.nodes()[static_cast<std::size_t>(index)];
  const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  if (node.variable < 0) {
    os << pad << label << "[" << node.cell << "] = " << fmt(node.coefficient) << "  (n=" << node.persons << ")\n";
    return;
  }
  const std::string name = variable_name(variables, static_cast<std::size_t>(node.variable));
  os << pad << name << " <= " << fmt(node.threshold) << "\n";
  ascii_node(tree, node.left, variables, label, depth + 1, os);
  os << pad << name << " > " << fmt(node.threshold) << "\n";
  ascii_node(tree, node.right, variables, label, depth + 1, os);
}

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

void dot_component(const ComponentTree& tree, std::string_view prefix, std::string_view title,
                   std::string_view label, const std::vector<VariableSpec>& variables, std::ostringstream& os) {
  os << "  subgraph cluster_" << prefix << " {\n";
  os << "    label=\"" << title << "\";\n";
  const auto& nodes = tree.nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& n = nodes[k];
    os << "    " << prefix << k << " [";
    if (n.variable < 0) {
      os << "shape=ellipse, label=\"" << label << "[" << n.cell << "] = " << fmt(n.coefficient) << "\\nn = " << n.persons
         << "\"";
    } else {
      os << "shape=box, label=\"" << dot_escape(variable_name(variables, static_cast<std::size_t>(n.variable))) << "\"";
    }
    os << "];\n";
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& n = nodes[k];
    if (n.variable < 0) continue;
    os << "    " << prefix << k << " -> " << prefix << n.left << " [label=\"<= " << fmt(n.threshold) << "\"];\n";
    os << "    " << prefix << k << " -> " << prefix << n.right << " [label=\"> " << fmt(n.threshold) << "\"];\n";
  }
  os << "  }\n";
}

std::string dot_identifier(std::string_view s) {
  std::string out = "item_";
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (permutations < 1) throw std::invalid_argument("permutations must be at least 1");
  if (min_node < 1) throw std::invalid_argument("min-node must be at least 1");
  if (threads < 0) throw std::invalid_argument("threads must be non-negative");
}

MethodConfig RunConfig::method_config() const {
  MethodConfig c;
  c.method = method;
  c.strategy = strategy;
  c.grow.alpha = alpha;
  c.grow.permutations = permutations;
  c.grow.min_node = min_node;
  c.grow.seed = seed;
  c.grow.per_item_stopping = per_item_stopping;
  c.grow.score.rest_score = rest_score;
  c.grow.score.standardize = standardize;
  c.group_variable = group_variable;
  return c;
}

void to_json(json& j, const RunConfig& c) {
  j = {{"method", to_string(c.method)},
       {"strategy", to_string(c.strategy)},
       {"alpha", c.alpha},
       {"permutations", c.permutations},
       {"min-node", c.min_node},
       {"seed", c.seed},
       {"threads", c.threads},
       {"responses", c.responses},
       {"covariates", c.covariates},
       {"schema", c.schema},
       {"out", c.out},
       {"rest-score", c.rest_score},
       {"standardize", c.standardize},
       {"per-item-stopping", c.per_item_stopping},
       {"group-variable", c.group_variable}};
}

void from_json(const json& j, RunConfig& c) {
  const RunConfig d;
  c.method = parse_method(j.value("method", std::string(to_string(d.method))));
  c.strategy = parse_strategy(j.value("strategy", std::string(to_string(d.strategy))));
  c.alpha = j.value("alpha", d.alpha);
  c.permutations = j.value("permutations", d.permutations);
  c.min_node = j.value("min-node", d.min_node);
  c.seed = j.value("seed", d.seed);
  c.threads = j.value("threads", d.threads);
  c.responses = j.value("responses", d.responses);
  c.covariates = j.value("covariates", d.covariates);
  c.schema = j.value("schema", d.schema);
  c.out = j.value("out", d.out);
  c.rest_score = j.value("rest-score", d.rest_score);
  c.standardize = j.value("standardize", d.standardize);
  c.per_item_stopping = j.value("per-item-stopping", d.per_item_stopping);
  c.group_variable = j.value("group-variable", d.group_variable);
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::None: return "none";
    case Verdict::Uniform: return "uniform";
    case Verdict::NonUniform: return "non-uniform";
    case Verdict::Undetermined: return "dif-type-undetermined";
  }
  return "";
}

Verdict parse_verdict(std::string_view text) {
  for (auto v : {Verdict::None, Verdict::Uniform, Verdict::NonUniform, Verdict::Undetermined}) {
    if (text == to_string(v)) return v;
  }
  throw DataError("unknown verdict \"" + std::string(text) + "\"");
}

Verdict item_verdict(const ItemTree& tree, Strategy) {
  if (!tree.has_dif()) return Verdict::None;
  return tree.has_slope_split() ? Verdict::NonUniform : Verdict::Uniform;
}

Verdict item_verdict(const ItemTestResult& test, double alpha) {
  if (!(test.lr.p_value < alpha)) return Verdict::None;
  switch (test.strategy) {
    case Strategy::Udif: return Verdict::Uniform;
    case Strategy::Nudif: return Verdict::NonUniform;
    case Strategy::Dif: return Verdict::Undetermined;
  }
  return Verdict::Undetermined;
}

DifReport make_report(const Dataset& data, const RunConfig& config, const MethodRun& run) {
  DifReport r;
  r.config = config;
  r.variables = data.covariates.specs();
  const auto& names = data.responses.item_names();
  for (std::size_t i = 0; i < data.responses.items(); ++i) {
    ItemReport item;
    item.item = i;
    item.name = names[i];
    if (run.growth) {
      const auto& tree = run.growth->trees[i];
      item.verdict = item_verdict(tree, config.strategy);
      for (auto j : tree.dif_variables()) item.variables.push_back(r.variables[j].name);
      item.tree = tree;
    } else {
      for (const auto& t : run.tests) {
        if (t.item != i) continue;
        item.verdict = item_verdict(t, config.alpha);
        item.test = t;
        if (item.verdict != Verdict::None) {
          if (config.method == Method::LogisticClassical) {
            item.variables.push_back(config.group_variable.empty() ? r.variables.front().name
                                                                   : config.group_variable);
          } else {
            for (const auto& v : r.variables) item.variables.push_back(v.name);
          }
        }
      }
    }
    r.items.push_back(std::move(item));
  }
  if (run.growth) r.trail = run.growth->trail;
  return r;
}

json tree_to_json(const ComponentTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes()) {
    nodes.push_back({{"variable", n.variable},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"cell", n.cell},
                     {"coefficient", n.coefficient},
                     {"persons", n.persons}});
  }
  return {{"nodes", nodes}};
}

ComponentTree tree_from_json(const json& j) {
  std::vector<ComponentTree::Node> nodes;
  for (const auto& n : j.at("nodes")) {
    ComponentTree::Node node;
    node.variable = n.at("variable").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<int>();
    node.right = n.at("right").get<int>();
    node.cell = n.at("cell").get<int>();
    node.coefficient = n.at("coefficient").get<double>();
    node.persons = n.at("persons").get<std::size_t>();
    nodes.push_back(node);
  }
  return ComponentTree(std::move(nodes));
}

json item_tree_to_json(const ItemTree& tree) {
  json splits = json::array();
  for (const auto& s : tree.splits) {
    splits.push_back({{"iteration", s.iteration},
                      {"variable", s.variable},
                      {"cell", s.cell},
                      {"component", to_string(s.component)},
                      {"threshold", s.threshold},
                      {"statistic", s.statistic},
                      {"p_value", s.p_value}});
  }
  return {{"item", tree.item},
          {"intercept", tree_to_json(tree.intercept)},
          {"slope", tree_to_json(tree.slope)},
          {"splits", splits}};
}

ItemTree item_tree_from_json(const json& j) {
  ItemTree t;
  t.item = j.at("item").get<std::size_t>();
  t.intercept = tree_from_json(j.at("intercept"));
  t.slope = tree_from_json(j.at("slope"));
  for (const auto& s : j.at("splits")) {
    SplitRecord r;
    r.iteration = s.at("iteration").get<int>();
    r.variable = s.at("variable").get<std::size_t>();
    r.cell = s.at("cell").get<int>();
    r.component = parse_component(s.at("component").get<std::string>());
    r.threshold = s.at("threshold").get<double>();
    r.statistic = s.at("statistic").get<double>();
    r.p_value = s.at("p_value").get<double>();
    t.splits.push_back(r);
  }
  return t;
}

json to_json(const DifReport& r) {
  json vars = json::array();
  for (const auto& v : r.variables) vars.push_back({{"name", v.name}, {"scale", to_string(v.scale)}});
  json items = json::array();
  for (const auto& it : r.items) {
    json e = {{"item", it.item}, {"name", it.name}, {"verdict", to_string(it.verdict)}, {"variables", it.variables}};
    if (it.tree) e["tree"] = item_tree_to_json(*it.tree);
    if (it.test) e["test"] = test_to_json(*it.test);
    items.push_back(std::move(e));
  }
  json trail = json::array();
  for (const auto& s : r.trail) trail.push_back(trail_step_to_json(s));
  return {{"schema_version", r.schema_version},
          {"version", r.version},
          {"config", r.config},
          {"variables", vars},
          {"items", items},
          {"trail", trail}};
}

DifReport report_from_json(const json& j) {
  DifReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion) {
    throw DataError("unsupported report schema version " + std::to_string(r.schema_version));
  }
  r.version = j.at("version").get<std::string>();
  r.config = j.at("config").get<RunConfig>();
  for (const auto& v : j.at("variables")) {
    r.variables.push_back({v.at("name").get<std::string>(), parse_scale(v.at("scale").get<std::string>())});
  }
  for (const auto& e : j.at("items")) {
    ItemReport it;
    it.item = e.at("item").get<std::size_t>();
    it.name = e.at("name").get<std::string>();
    it.verdict = parse_verdict(e.at("verdict").get<std::string>());
    it.variables = e.at("variables").get<std::vector<std::string>>();
    if (e.contains("tree")) it.tree = item_tree_from_json(e.at("tree"));
    if (e.contains("test")) it.test = test_from_json(e.at("test"), it.item);
    r.items.push_back(std::move(it));
  }
  for (const auto& s : j.at("trail")) r.trail.push_back(trail_step_from_json(s));
  return r;
}

TreeFormat parse_tree_format(std::string_view text) {
  if (text == "ascii" || text == "txt") return TreeFormat::Ascii;
  if (text == "json") return TreeFormat::Json;
  if (text == "dot") return TreeFormat::Dot;
  throw std::invalid_argument("unknown tree format \"" + std::string(text) + "\" (expected ascii, json or dot)");
}

std::string render_tree(const ItemTree& tree, TreeFormat format, const std::vector<VariableSpec>& variables,
                        std::string_view item_name) {
  // Constant components keep the plain logistic names.
  const std::string_view ilabel = tree.intercept.is_constant() ? "beta0" : "gamma";
  const std::string_view slabel = tree.slope.is_constant() ? "beta" : "alpha";
  std::ostringstream os;
  switch (format) {
    case TreeFormat::Json:
      os << item_tree_to_json(tree).dump(2) << "\n";
      break;
    case TreeFormat::Ascii:
      os << "item " << item_name << "\n";
      os << "intercept component\n";
      ascii_node(tree.intercept, 0, variables, ilabel, 1, os);
      os << "slope component\n";
      ascii_node(tree.slope, 0, variables, slabel, 1, os);
      break;
    case TreeFormat::Dot:
      os << "digraph " << dot_identifier(item_name) << " {\n";
      os << "  label=\"item " << dot_escape(item_name) << "\";\n";
      dot_component(tree.intercept, "i", "intercept", ilabel, variables, os);
      dot_component(tree.slope, "s", "slope", slabel, variables, os);
      os << "}\n";
      break;
  }
  return os.str();
}

}  // namespace ift
