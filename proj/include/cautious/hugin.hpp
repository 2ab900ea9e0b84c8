#pragma once

// Classical two-phase HUGIN propagation on working copies of the baselines.
// Findings are multiplied into clique tables; the separator tables from the
// collect phase are kept so that subset probabilities at separators can be
// recovered (exactly, or as bounds when the collect tables contain zeros).

#include <memory>
#include <optional>
#include <vector>

#include "cautious/junction_tree.hpp"
#include "cautious/network.hpp"
#include "cautious/potential.hpp"

namespace cautious {

/// Subset probabilities readable at one separator. "right" is the evidence
/// in the child subtree, "left" the evidence on the root side.
struct SeparatorBounds {
  double p_right = 1.0;
  double p_left_lower = 1.0;
  double p_left_upper = 1.0;
};

class HuginState {
 public:
  /// The tree must be calibrated.
  explicit HuginState(std::shared_ptr<const JunctionTree> tree);

  /// Multiplies f into the working table of its home clique.
  void enter_finding(const Finding& f);

  /// CollectEvidence then DistributeEvidence from the root. Returns P(e);
  /// zero means the evidence is impossible.
  double propagate();

  bool propagated() const { return mass_.has_value(); }
  double evidence_probability() const;

  /// Normalized P(x | e).
  std::vector<double> marginal(VarId x) const;

  SeparatorBounds separator_subset_bounds(int s) const;

  const Potential& clique_table(int v) const { return cliques_.at(static_cast<std::size_t>(v)); }
  const Potential& separator_table(int s) const { return separators_.at(static_cast<std::size_t>(s)); }
  /// P(e_r, S) as it stood after the collect phase.
  const Potential& collect_table(int s) const;

  const JunctionTree& tree() const { return *tree_; }
  const std::vector<Finding>& entered() const { return entered_; }
  const OpCounters& counters() const { return counters_; }

  /// Runs only the collect phase (toward the root). Exposed for inspection.
  void collect();
  /// Runs the distribute phase; collect() must have run.
  double distribute();

 private:
  void absorb(int from, int to, int s, bool collecting);

  std::shared_ptr<const JunctionTree> tree_;
  std::vector<Potential> cliques_;
  std::vector<Potential> separators_;
  std::vector<std::optional<Potential>> collect_snapshot_;
  std::vector<Finding> entered_;
  std::optional<double> mass_;
  bool collected_ = false;
  OpCounters counters_;
};

struct ConditionedTree {
  JunctionTree conditioned;
  double p_h = 1.0;
};

/// Enters h as evidence on a clean tree, HUGIN-propagates and returns the
/// tree with baselines P(V | h), P(S | h) along with P(h).
ConditionedTree condition_on_hypothesis(std::shared_ptr<const JunctionTree> jt, const Hypothesis& h);

}  // namespace cautious
