#include "ift/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ift/error.hpp"

namespace ift {

std::string_view to_string(Component component) {
  switch (component) {
    case Component::Intercept: return "intercept";
    case Component::Slope: return "slope";
    case Component::Simultaneous: return "simultaneous";
  }
  return "intercept";
}

Component parse_component(std::string_view text) {
  if (text == "intercept") return Component::Intercept;
  if (text == "slope") return Component::Slope;
  if (text == "simultaneous") return Component::Simultaneous;
  throw std::invalid_argument("unknown tree component \"" + std::string(text) + "\"");
}

bool Region::contains(std::span<const double> x) const {
  return std::all_of(conditions.begin(), conditions.end(), [&](const Condition& c) { return c.holds(x[c.variable]); });
}

bool Region::consistent() const {
  std::vector<std::size_t> vars;
  for (const auto& c : conditions) vars.push_back(c.variable);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  for (auto v : vars) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& c : conditions) {
      if (c.variable != v) continue;
      if (c.side == Side::Greater) {
        lo = std::max(lo, c.threshold);
      } else {
        hi = std::min(hi, c.threshold);
      }
    }
    if (!(lo < hi)) return false;
  }
  return true;
}

std::string Region::describe(const std::vector<VariableSpec>& variables) const {
  if (conditions.empty()) return "all";
  std::ostringstream out;
  for (std::size_t k = 0; k < conditions.size(); ++k) {
    const auto& c = conditions[k];
    if (k) out << " & ";
    out << variables.at(c.variable).name << (c.side == Side::LessEqual ? " <= " : " > ") << c.threshold;
  }
  return out.str();
}

ComponentTree::ComponentTree() {
  Node root;
  root.cell = 0;
  nodes_.push_back(root);
  cell_node_.push_back(0);
}

ComponentTree::ComponentTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("tree has no nodes");
  std::vector<int> cells;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& n = nodes_[k];
    const bool terminal = n.variable < 0;
    if (terminal) {
      if (n.left >= 0 || n.right >= 0 || n.cell < 0) throw DataError("malformed terminal tree node");
      cells.push_back(n.cell);
    } else {
      const auto size = static_cast<int>(nodes_.size());
      if (n.left <= static_cast<int>(k) || n.right <= static_cast<int>(k) || n.left >= size || n.right >= size) {
        throw DataError("malformed internal tree node");
      }
    }
  }
  cell_node_.assign(cells.size(), -1);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& n = nodes_[k];
    if (n.variable >= 0) continue;
    if (n.cell >= static_cast<int>(cells.size()) || cell_node_[n.cell] >= 0) throw DataError("tree cells are not a permutation");
    cell_node_[n.cell] = static_cast<int>(k);
  }
}

int ComponentTree::cell_of(std::span<const double> x) const {
  int k = 0;
  while (nodes_[k].variable >= 0) {
    const auto& n = nodes_[k];
    k = x[static_cast<std::size_t>(n.variable)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[k].cell;
}

Region ComponentTree::region(int cell) const {
  // Walk down from the root following the unique path to the terminal node.
  const int target = cell_node_.at(cell);
  std::vector<int> parent(nodes_.size(), -1);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    if (nodes_[k].variable >= 0) {
      parent[nodes_[k].left] = static_cast<int>(k);
      parent[nodes_[k].right] = static_cast<int>(k);
    }
  }
  Region r;
  for (int k = target; parent[k] >= 0; k = parent[k]) {
    const auto& p = nodes_[parent[k]];
    r.conditions.push_back({static_cast<std::size_t>(p.variable), p.threshold,
                            p.left == k ? Side::LessEqual : Side::Greater});
  }
  std::reverse(r.conditions.begin(), r.conditions.end());
  return r;
}

int ComponentTree::split(int cell, std::size_t variable, double threshold) {
  const int node = cell_node_.at(cell);
  const int new_cell = cells();
  Node left;
  left.cell = cell;
  left.coefficient = nodes_[node].coefficient;
  Node right;
  right.cell = new_cell;
  right.coefficient = nodes_[node].coefficient;
  const int left_index = static_cast<int>(nodes_.size());
  nodes_.push_back(left);
  nodes_.push_back(right);
  auto& n = nodes_[node];
  n.variable = static_cast<int>(variable);
  n.threshold = threshold;
  n.left = left_index;
  n.right = left_index + 1;
  n.cell = -1;
  cell_node_[cell] = left_index;
  cell_node_.push_back(left_index + 1);
  return new_cell;
}

std::vector<std::size_t> ComponentTree::split_variables() const {
  std::set<std::size_t> vars;
  for (const auto& n : nodes_) {
    if (n.variable >= 0) vars.insert(static_cast<std::size_t>(n.variable));
  }
  return {vars.begin(), vars.end()};
}

std::vector<std::size_t> ItemTree::dif_variables() const {
  std::set<std::size_t> vars;
  for (auto v : intercept.split_variables()) vars.insert(v);
  for (auto v : slope.split_variables()) vars.insert(v);
  return {vars.begin(), vars.end()};
}

double predict_eta(const ItemTree& tree, std::span<const double> x, double score) {
  return tree.intercept.coefficient(tree.intercept.cell_of(x)) + score * tree.slope.coefficient(tree.slope.cell_of(x));
}

std::vector<double> enumerate_split_points(const VariableSpec& /*variable*/, std::span<const double> values,
                                           std::size_t min_node) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  const std::size_t n = sorted.size();
  std::size_t k = 0;
  while (k < n) {
    std::size_t next = k;
    while (next < n && sorted[next] == sorted[k]) ++next;
    if (next >= n) break;
    const std::size_t left = next;
    const std::size_t right = n - next;
    if (left >= min_node && right >= min_node) out.push_back(0.5 * (sorted[k] + sorted[next]));
    k = next;
  }
  return out;
}

}  // namespace ift
