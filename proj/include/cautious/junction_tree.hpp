#pragma once

#include <memory>
#include <vector>

#include "cautious/network.hpp"
#include "cautious/potential.hpp"

namespace cautious {

struct Clique {
  int index = 0;
  Domain domain;
  // P(V) once calibrated; the product of assigned factors before that.
  Potential baseline;
  std::vector<VarId> family_of;  // variables whose CPT was assigned here
};

/// Link between two cliques. `parent` is the endpoint nearer the root.
struct Separator {
  int index = 0;
  Domain domain;
  Potential baseline;  // P(S) once calibrated, ones before that
  int parent = 0;
  int child = 0;
};

/// A rooted tree of cliques joined by separators. Variable identifiers index
/// into `variables()`.
class JunctionTree {
 public:
  JunctionTree() = default;

  /// Assembles a tree from explicit parts. `edges` are clique index pairs; the
  /// tree is oriented from `root`. Each clique's potential becomes its
  /// (uncalibrated) baseline and separators start as tables of ones.
  /// `home` gives, per variable, the clique findings on it attach to; pass an
  /// empty vector to use the lowest-index clique containing the variable.
  static JunctionTree from_parts(std::vector<Variable> variables, std::vector<Potential> clique_potentials,
                                 const std::vector<std::pair<int, int>>& edges, std::vector<int> home = {},
                                 std::vector<std::vector<VarId>> family_of = {}, int root = 0);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Clique>& cliques() const { return cliques_; }
  const std::vector<Separator>& separators() const { return separators_; }
  const Clique& clique(int v) const { return cliques_.at(static_cast<std::size_t>(v)); }
  const Separator& separator(int s) const { return separators_.at(static_cast<std::size_t>(s)); }
  int root() const { return root_; }
  bool calibrated() const { return calibrated_; }
  std::size_t num_cliques() const { return cliques_.size(); }
  std::size_t num_separators() const { return separators_.size(); }

  /// Separators incident to clique v, in separator-index order.
  const std::vector<int>& incident(int v) const { return incident_.at(static_cast<std::size_t>(v)); }
  /// Separators to v's children, ordered by child clique index.
  const std::vector<int>& child_separators(int v) const { return children_.at(static_cast<std::size_t>(v)); }
  /// Separator to v's parent, or -1 at the root.
  int parent_separator(int v) const { return parent_sep_.at(static_cast<std::size_t>(v)); }
  /// Clique across separator s from v.
  int neighbour(int v, int s) const;
  /// Clique that findings on `var` (and its CPT) attach to.
  int home_clique(VarId var) const { return home_.at(static_cast<std::size_t>(var)); }
  /// True when clique v lies on the child side of separator s.
  bool in_subtree(int s, int v) const;

  /// Depth-first orders from the root, children by clique index.
  const std::vector<int>& preorder() const { return preorder_; }
  std::vector<int> postorder() const { return {preorder_.rbegin(), preorder_.rend()}; }

  /// Smallest clique (by table size, then index) containing `var`.
  int smallest_clique_containing(VarId var) const;

  /// Copy with every baseline replaced; marks the result calibrated.
  JunctionTree with_baselines(std::vector<Potential> cliques, std::vector<Potential> separators) const;

 private:
  void orient();

  std::vector<Variable> variables_;
  std::vector<Clique> cliques_;
  std::vector<Separator> separators_;
  std::vector<std::vector<int>> incident_;
  std::vector<std::vector<int>> children_;
  std::vector<int> parent_sep_;
  std::vector<int> home_;
  std::vector<int> preorder_;
  std::vector<int> enter_, exit_;  // DFS timestamps for subtree tests
  int root_ = 0;
  bool calibrated_ = false;
};

/// Moralize, triangulate (min-fill, ties to the lowest variable index),
/// extract cliques in elimination order, join them with a maximum-weight
/// spanning tree and assign each CPT to the lowest-index clique holding its
/// family. The result is not yet calibrated.
JunctionTree build_junction_tree(const BayesianNetwork& net);

/// Calibrates so each clique holds P(V) and each separator P(S). Runs one
/// cautious propagation with unit separators and reads the baselines off
/// the stored messages.
JunctionTree initialize_consistent(const JunctionTree& jt);

/// build_junction_tree followed by initialize_consistent.
JunctionTree compile(const BayesianNetwork& net);

/// Elimination order chosen by the min-fill heuristic on the moral graph.
std::vector<VarId> min_fill_order(const BayesianNetwork& net);

}  // namespace cautious
