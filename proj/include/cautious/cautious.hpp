#pragma once

// Cautious propagation.
//
// The tree's baselines P(V), P(S) are never modified. Propagation fills one
// mailbox per directed link: the clique W sending over S stores
//
//     T(S) = sum_{W \ S} P(W) * prod_f F_f * prod_{S' != S} T_in(S') / P(S')
//
// which equals P(S, e_W) for the evidence e_W behind W. Findings are kept as
// separate messages F_f at their home clique, so any union of a clique's
// incoming evidence blocks and local findings has a locally computable
// probability.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cautious/junction_tree.hpp"
#include "cautious/network.hpp"
#include "cautious/potential.hpp"

namespace cautious {

using FindingSet = std::set<std::string>;

struct FindingMessage {
  Finding finding;
  Potential table;  // F_f over the finding's variable
  int attached_clique = 0;
};

enum class Direction {
  toward_root,     // child clique -> parent clique; carries child-side evidence
  away_from_root,  // parent clique -> child clique; carries root-side evidence
};

/// Result of splitting the evidence at a separator. "left" is the root side,
/// "right" the child side.
struct SeparatorSplit {
  FindingSet e_left;
  FindingSet e_right;
  double p_left = 1.0;
  double p_right = 1.0;
};

/// How to evaluate one accessible subset locally at a clique.
struct SubsetRecipe {
  int clique = 0;
  std::vector<int> separators;       // incoming message ratios to include
  std::vector<std::string> findings;  // local finding ids to include
};

struct AccessibleSubset {
  FindingSet findings;
  SubsetRecipe recipe;
};

/// Tables held beyond the immutable baselines.
struct StorageStats {
  std::size_t separators = 0;
  std::size_t max_messages_per_separator = 0;
  std::size_t message_tables = 0;
  std::size_t finding_tables = 0;
};

class CautiousState {
 public:
  explicit CautiousState(std::shared_ptr<const JunctionTree> tree);

  /// Stores f as a message at its variable's home clique. Baselines are untouched.
  void enter_finding(const Finding& f);
  /// Drops a finding; the state must be propagated again before queries.
  void retract_finding(std::string_view id);

  /// Collect toward the root, then distribute. Returns P(e).
  double propagate();

  bool propagated() const { return propagated_; }
  /// P(e) from the last propagation.
  double evidence_probability() const;

  const JunctionTree& tree() const { return *tree_; }
  std::shared_ptr<const JunctionTree> tree_ptr() const { return tree_; }
  const std::vector<FindingMessage>& findings() const { return findings_; }
  const FindingMessage& finding(std::string_view id) const;
  FindingSet all_finding_ids() const;

  const OpCounters& counters() const { return counters_; }
  void reset_counters() { counters_.reset(); }

  /// Stored T over separator s in the given direction.
  const Potential& message(int s, Direction dir) const;
  /// T / P(S) with 0/0 = 0.
  Potential message_ratio(int s, Direction dir) const;
  /// Findings behind the sender of the given directed link.
  FindingSet evidence_behind(int s, Direction dir) const;

  SeparatorSplit separator_split(int s) const;

  /// P(V) times the chosen incoming ratios and local finding tables, i.e.
  /// P(V, union of the chosen evidence).
  Potential clique_local_joint(int v, const std::vector<int>& incoming, const std::vector<std::string>& local) const;

  /// Every union of a clique's incoming evidence blocks and local findings,
  /// deduplicated, ordered by size then lexicographically.
  std::vector<AccessibleSubset> accessible_subsets() const;
  std::optional<SubsetRecipe> find_recipe(const FindingSet& subset) const;
  /// P(e') for an accessible e'; throws NotAccessible otherwise.
  double subset_probability(const FindingSet& subset) const;

  /// P(x | e).
  std::vector<double> marginal(VarId x) const;

  /// New calibrated tree conditioned on the current evidence.
  JunctionTree reinitialize() const;

  /// P(e with finding x replaced by y), computed at x's clique without sending messages.
  double what_if(std::string_view x, const Finding& y) const;

  StorageStats storage() const;

 private:
  Direction incoming_direction(int v, int s) const;
  Potential outgoing(int v, int s, std::vector<std::optional<Potential>>& aux);
  Potential full_local_product(int v, OpCounters* counters) const;
  void require_propagated() const;
  void build_family();
  std::size_t finding_index(std::string_view id) const;

  std::shared_ptr<const JunctionTree> tree_;
  std::vector<FindingMessage> findings_;
  // mailboxes_[s][0] toward root, [1] away from root
  std::vector<std::array<std::optional<Potential>, 2>> mailboxes_;
  std::vector<AccessibleSubset> family_;
  std::map<FindingSet, std::size_t> family_index_;
  OpCounters counters_;
  double evidence_mass_ = 1.0;
  bool propagated_ = false;
};

}  // namespace cautious
