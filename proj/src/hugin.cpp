#include "cautious/hugin.hpp"

#include <stdexcept>

namespace cautious {

HuginState::HuginState(std::shared_ptr<const JunctionTree> tree) : tree_(std::move(tree)) {
  if (!tree_->calibrated()) throw std::logic_error("hugin: the junction tree must be calibrated first");
  for (const auto& c : tree_->cliques()) cliques_.push_back(c.baseline);
  for (const auto& s : tree_->separators()) separators_.push_back(s.baseline);
  collect_snapshot_.resize(separators_.size());
}

void HuginState::enter_finding(const Finding& f) {
  if (collected_) throw std::logic_error("hugin: findings must be entered before propagation");
  validate_finding(f, tree_->variables());
  for (const auto& e : entered_) {
    if (e.id == f.id) throw EvidenceError("duplicate finding id '" + f.id + "'");
  }
  const int v = tree_->home_clique(f.variable);
  const int card = tree_->variables()[static_cast<std::size_t>(f.variable)].cardinality();
  auto& table = cliques_[static_cast<std::size_t>(v)];
  table = multiply(table, finding_table(f, card), &counters_);
  entered_.push_back(f);
}

// `to` absorbs from `from` through separator s.
void HuginState::absorb(int from, int to, int s, bool collecting) {
  auto& sep = separators_[static_cast<std::size_t>(s)];
  Potential fresh = marginalize(cliques_[static_cast<std::size_t>(from)], sep.domain(), &counters_);
  const Potential ratio = divide(fresh, sep, &counters_);
  sep = std::move(fresh);
  if (collecting) collect_snapshot_[static_cast<std::size_t>(s)] = sep;
  auto& target = cliques_[static_cast<std::size_t>(to)];
  target = multiply(target, ratio, &counters_);
  ++counters_.messages_sent;
}

void HuginState::collect() {
  if (collected_) throw std::logic_error("hugin: already propagated");
  for (int v : tree_->postorder()) {
    const int s = tree_->parent_separator(v);
    if (s >= 0) absorb(v, tree_->separator(s).parent, s, true);
  }
  collected_ = true;
}

double HuginState::distribute() {
  if (!collected_) throw std::logic_error("hugin: collect() must run first");
  for (int v : tree_->preorder()) {
    for (int s : tree_->child_separators(v)) absorb(v, tree_->separator(s).child, s, false);
  }
  mass_ = marginalize(cliques_[static_cast<std::size_t>(tree_->root())], Domain{}, &counters_)[0];
  return *mass_;
}

double HuginState::propagate() {
  if (mass_) return *mass_;
  collect();
  return distribute();
}

double HuginState::evidence_probability() const {
  if (!mass_) throw std::logic_error("hugin: not propagated");
  return *mass_;
}

std::vector<double> HuginState::marginal(VarId x) const {
  if (!mass_) throw std::logic_error("hugin: not propagated");
  if (x < 0 || static_cast<std::size_t>(x) >= tree_->variables().size()) {
    throw EvidenceError("unknown variable " + std::to_string(x));
  }
  if (*mass_ <= 0.0) throw ImpossibleEvidence("evidence has probability zero");
  const int v = tree_->smallest_clique_containing(x);
  const auto& table = cliques_[static_cast<std::size_t>(v)];
  // normalization by P(e) is deferred to this readout
  const auto m = marginalize(table, subdomain(table.domain(), std::vector<VarId>{x}));
  const double z = m.sum();
  if (z <= 0.0) throw ImpossibleEvidence("evidence has probability zero");
  auto out = m.to_vector();
  for (double& p : out) p /= z;
  return out;
}

const Potential& HuginState::collect_table(int s) const {
  const auto& snap = collect_snapshot_.at(static_cast<std::size_t>(s));
  if (!snap) throw std::logic_error("hugin: collect phase has not run");
  return *snap;
}

SeparatorBounds HuginState::separator_subset_bounds(int s) const {
  if (!mass_) throw std::logic_error("hugin: not propagated");
  const Potential& prior = tree_->separator(s).baseline;  // P(S)
  const Potential& right = collect_table(s);             // P(e_r, S)
  const Potential& both = separators_[static_cast<std::size_t>(s)];  // P(e_r, e_l, S)
  SeparatorBounds out;
  out.p_right = right.sum();
  out.p_left_lower = 0.0;
  out.p_left_upper = 0.0;
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (right[i] == 0.0) {
      // P(e_l | s) is unrecoverable here: somewhere in [0, 1].
      out.p_left_upper += prior[i];
    } else {
      const double term = both[i] * prior[i] / right[i];
      out.p_left_lower += term;
      out.p_left_upper += term;
    }
  }
  return out;
}

ConditionedTree condition_on_hypothesis(std::shared_ptr<const JunctionTree> jt, const Hypothesis& h) {
  validate_hypothesis(h, jt->variables());
  if (h.empty()) return {*jt, 1.0};
  HuginState state(jt);
  for (auto [var, s] : h.assignments) {
    const int card = jt->variables()[static_cast<std::size_t>(var)].cardinality();
    state.enter_finding(Finding::hard("h:" + jt->variables()[static_cast<std::size_t>(var)].name, var, s, card));
  }
  const double p_h = state.propagate();
  if (p_h <= 0.0) throw ImpossibleHypothesis("hypothesis has probability zero");
  const double inv = 1.0 / p_h;
  std::vector<Potential> cliques, seps;
  for (std::size_t v = 0; v < jt->num_cliques(); ++v) cliques.push_back(scaled(state.clique_table(static_cast<int>(v)), inv));
  for (std::size_t s = 0; s < jt->num_separators(); ++s) seps.push_back(scaled(state.separator_table(static_cast<int>(s)), inv));
  return {jt->with_baselines(std::move(cliques), std::move(seps)), p_h};
}

}  // namespace cautious
