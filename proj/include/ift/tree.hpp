#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ift/data.hpp"

namespace ift {

enum class Component { Intercept, Slope, Simultaneous };

std::string_view to_string(Component component);
Component parse_component(std::string_view text);

enum class Side { LessEqual, Greater };

struct Condition {
  std::size_t variable = 0;
  double threshold = 0.0;
  Side side = Side::LessEqual;

  bool holds(double value) const { return side == Side::LessEqual ? value <= threshold : value > threshold; }
  bool operator==(const Condition&) const = default;
};

// Conjunction of threshold indicators; the empty region is the whole space.
struct Region {
  std::vector<Condition> conditions;

  bool contains(std::span<const double> x) const;
  // False when two conditions on the same variable cannot hold together.
  bool consistent() const;
  std::string describe(const std::vector<VariableSpec>& variables) const;
};

// Binary partition of covariate space. Every terminal node owns a cell index
// in [0, cells()); splitting cell c keeps c for the "<= threshold" child and
// gives the "> threshold" child the next free index.
class ComponentTree {
 public:
  struct Node {
    int variable = -1;  // -1 for terminal nodes
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int cell = -1;  // terminal nodes only
    double coefficient = 0.0;
    std::size_t persons = 0;
  };

  ComponentTree();
  // Rebuilds a tree from its node list (deserialisation). Validates links and
  // that cell indices are a permutation of [0, cells).
  explicit ComponentTree(std::vector<Node> nodes);

  int cells() const { return static_cast<int>(cell_node_.size()); }
  bool is_constant() const { return nodes_.size() == 1; }
  const std::vector<Node>& nodes() const { return nodes_; }

  int cell_of(std::span<const double> x) const;
  Region region(int cell) const;
  int split(int cell, std::size_t variable, double threshold);

  double coefficient(int cell) const { return nodes_[cell_node_[cell]].coefficient; }
  void set_coefficient(int cell, double value) { nodes_[cell_node_[cell]].coefficient = value; }
  void set_persons(int cell, std::size_t persons) { nodes_[cell_node_[cell]].persons = persons; }
  std::size_t persons(int cell) const { return nodes_[cell_node_[cell]].persons; }

  // Variables used by at least one internal node, ascending.
  std::vector<std::size_t> split_variables() const;
  std::size_t split_count() const { return nodes_.size() / 2; }

 private:
  std::vector<Node> nodes_;
  std::vector<int> cell_node_;
};

struct SplitRecord {
  int iteration = 0;
  std::size_t variable = 0;
  int cell = 0;
  Component component = Component::Intercept;
  double threshold = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
};

// Intercept and slope trees of one item: eta = tr(x) + S * tr_slope(x).
// A constant intercept tree is the ordinary beta_0i, a constant slope tree the
// ordinary score slope beta_i.
struct ItemTree {
  std::size_t item = 0;
  ComponentTree intercept;
  ComponentTree slope;
  std::vector<SplitRecord> splits;

  bool has_dif() const { return !intercept.is_constant() || !slope.is_constant(); }
  bool has_slope_split() const { return !slope.is_constant(); }
  std::vector<std::size_t> dif_variables() const;
};

double predict_eta(const ItemTree& tree, std::span<const double> x, double score);

// Candidate thresholds for splitting a node on one variable: midpoints between
// consecutive distinct values observed in the node, keeping only thresholds
// that leave at least `min_node` persons on each side.
std::vector<double> enumerate_split_points(const VariableSpec& variable, std::span<const double> values,
                                           std::size_t min_node);

}  // namespace ift
