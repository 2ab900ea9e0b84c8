#include "cautious/cautious.hpp"

#include <algorithm>

namespace cautious {

namespace {

std::size_t slot(Direction dir) { return dir == Direction::toward_root ? 0 : 1; }

constexpr std::size_t kMaxBlocksPerClique = 24;

}  // namespace

CautiousState::CautiousState(std::shared_ptr<const JunctionTree> tree)
    : tree_(std::move(tree)), mailboxes_(tree_->num_separators()) {}

void CautiousState::enter_finding(const Finding& f) {
  validate_finding(f, tree_->variables());
  for (const auto& m : findings_) {
    if (m.finding.id == f.id) throw EvidenceError("duplicate finding id '" + f.id + "'");
  }
  const int card = tree_->variables()[static_cast<std::size_t>(f.variable)].cardinality();
  findings_.push_back({f, finding_table(f, card), tree_->home_clique(f.variable)});
  propagated_ = false;
}

void CautiousState::retract_finding(std::string_view id) {
  findings_.erase(findings_.begin() + static_cast<std::ptrdiff_t>(finding_index(id)));
  propagated_ = false;
}

std::size_t CautiousState::finding_index(std::string_view id) const {
  for (std::size_t i = 0; i < findings_.size(); ++i) {
    if (findings_[i].finding.id == id) return i;
  }
  throw EvidenceError("unknown finding id '" + std::string(id) + "'");
}

const FindingMessage& CautiousState::finding(std::string_view id) const { return findings_[finding_index(id)]; }

FindingSet CautiousState::all_finding_ids() const {
  FindingSet out;
  for (const auto& m : findings_) out.insert(m.finding.id);
  return out;
}

Direction CautiousState::incoming_direction(int v, int s) const {
  const auto& sep = tree_->separator(s);
  if (sep.parent == v) return Direction::toward_root;
  if (sep.child == v) return Direction::away_from_root;
  throw EvidenceError("separator " + std::to_string(s) + " is not adjacent to clique " + std::to_string(v));
}

Potential CautiousState::outgoing(int v, int s, std::vector<std::optional<Potential>>& aux) {
  // Findings are multiplied onto an auxiliary copy of P(W) once per
  // propagation; the baseline itself is left alone.
  auto& scratch = aux[static_cast<std::size_t>(v)];
  if (!scratch) {
    Potential t = tree_->clique(v).baseline;
    for (const auto& m : findings_) {
      if (m.attached_clique == v) t = multiply(t, m.table, &counters_);
    }
    scratch = std::move(t);
  }
  Potential product = *scratch;
  for (int other : tree_->incident(v)) {
    if (other == s) continue;
    const auto& box = mailboxes_[static_cast<std::size_t>(other)][slot(incoming_direction(v, other))];
    product = multiply(product, divide(*box, tree_->separator(other).baseline, &counters_), &counters_);
    ++counters_.message_multiplications;
  }
  ++counters_.messages_sent;
  return marginalize(product, tree_->separator(s).domain, &counters_);
}

double CautiousState::propagate() {
  for (auto& box : mailboxes_) box = {};
  std::vector<std::optional<Potential>> aux(tree_->num_cliques());

  for (int v : tree_->postorder()) {
    const int s = tree_->parent_separator(v);
    if (s >= 0) mailboxes_[static_cast<std::size_t>(s)][slot(Direction::toward_root)] = outgoing(v, s, aux);
  }
  for (int v : tree_->preorder()) {
    for (int s : tree_->child_separators(v)) {
      mailboxes_[static_cast<std::size_t>(s)][slot(Direction::away_from_root)] = outgoing(v, s, aux);
    }
  }

  const Potential root = full_local_product(tree_->root(), &counters_);
  evidence_mass_ = marginalize(root, Domain{}, &counters_)[0];
  propagated_ = true;
  build_family();
  return evidence_mass_;
}

void CautiousState::require_propagated() const {
  if (!propagated_) throw std::logic_error("cautious state: propagate() has not run since the last change");
}

double CautiousState::evidence_probability() const {
  require_propagated();
  return evidence_mass_;
}

const Potential& CautiousState::message(int s, Direction dir) const {
  require_propagated();
  const auto& box = mailboxes_.at(static_cast<std::size_t>(s))[slot(dir)];
  if (!box) throw std::logic_error("cautious state: empty mailbox");
  return *box;
}

Potential CautiousState::message_ratio(int s, Direction dir) const {
  const auto& box = mailboxes_.at(static_cast<std::size_t>(s))[slot(dir)];
  if (!box) throw std::logic_error("cautious state: empty mailbox");
  return divide(*box, tree_->separator(s).baseline);
}

FindingSet CautiousState::evidence_behind(int s, Direction dir) const {
  FindingSet out;
  for (const auto& m : findings_) {
    const bool child_side = tree_->in_subtree(s, m.attached_clique);
    if (child_side == (dir == Direction::toward_root)) out.insert(m.finding.id);
  }
  return out;
}

SeparatorSplit CautiousState::separator_split(int s) const {
  if (s < 0 || static_cast<std::size_t>(s) >= tree_->num_separators()) {
    throw StructuralError("invalid separator index " + std::to_string(s));
  }
  require_propagated();
  SeparatorSplit out;
  out.e_left = evidence_behind(s, Direction::away_from_root);
  out.e_right = evidence_behind(s, Direction::toward_root);
  out.p_left = message(s, Direction::away_from_root).sum();
  out.p_right = message(s, Direction::toward_root).sum();
  return out;
}

Potential CautiousState::full_local_product(int v, OpCounters* counters) const {
  Potential t = tree_->clique(v).baseline;
  for (int s : tree_->incident(v)) {
    const auto dir = incoming_direction(v, s);
    const auto& box = mailboxes_[static_cast<std::size_t>(s)][slot(dir)];
    t = multiply(t, divide(*box, tree_->separator(s).baseline, counters), counters);
  }
  for (const auto& m : findings_) {
    if (m.attached_clique == v) t = multiply(t, m.table, counters);
  }
  return t;
}

Potential CautiousState::clique_local_joint(int v, const std::vector<int>& incoming,
                                            const std::vector<std::string>& local) const {
  require_propagated();
  if (v < 0 || static_cast<std::size_t>(v) >= tree_->num_cliques()) {
    throw StructuralError("invalid clique index " + std::to_string(v));
  }
  Potential t = tree_->clique(v).baseline;
  for (int s : incoming) {
    t = multiply(t, message_ratio(s, incoming_direction(v, s)));
  }
  for (const auto& id : local) {
    const auto& m = finding(id);
    if (m.attached_clique != v) {
      throw EvidenceError("finding '" + id + "' is not attached to clique " + std::to_string(v));
    }
    t = multiply(t, m.table);
  }
  return t;
}

void CautiousState::build_family() {
  family_.clear();
  family_index_.clear();
  std::map<FindingSet, SubsetRecipe> best;
  for (const auto& c : tree_->cliques()) {
    const int v = c.index;
    struct Block {
      FindingSet ids;
      int separator = -1;
      std::string finding;
    };
    std::vector<Block> blocks;
    for (int s : tree_->incident(v)) {
      auto ids = evidence_behind(s, incoming_direction(v, s));
      if (!ids.empty()) blocks.push_back({std::move(ids), s, {}});
    }
    for (const auto& m : findings_) {
      if (m.attached_clique == v) blocks.push_back({{m.finding.id}, -1, m.finding.id});
    }
    if (blocks.size() > kMaxBlocksPerClique) {
      throw CapacityError("accessible subsets: clique " + std::to_string(v) + " has too many evidence blocks");
    }
    const std::uint64_t combos = std::uint64_t{1} << blocks.size();
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
      FindingSet ids;
      SubsetRecipe recipe{v, {}, {}};
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (!(mask & (std::uint64_t{1} << b))) continue;
        ids.insert(blocks[b].ids.begin(), blocks[b].ids.end());
        if (blocks[b].separator >= 0) {
          recipe.separators.push_back(blocks[b].separator);
        } else {
          recipe.findings.push_back(blocks[b].finding);
        }
      }
      auto it = best.find(ids);
      if (it == best.end()) {
        best.emplace(std::move(ids), std::move(recipe));
      } else if (c.domain.num_cells() < tree_->clique(it->second.clique).domain.num_cells()) {
        it->second = std::move(recipe);
      }
    }
  }
  for (auto& [ids, recipe] : best) family_.push_back({ids, std::move(recipe)});
  std::stable_sort(family_.begin(), family_.end(),
                   [](const auto& a, const auto& b) { return a.findings.size() < b.findings.size(); });
  for (std::size_t i = 0; i < family_.size(); ++i) family_index_.emplace(family_[i].findings, i);
}

std::vector<AccessibleSubset> CautiousState::accessible_subsets() const {
  require_propagated();
  return family_;
}

std::optional<SubsetRecipe> CautiousState::find_recipe(const FindingSet& subset) const {
  require_propagated();
  auto it = family_index_.find(subset);
  if (it == family_index_.end()) return std::nullopt;
  return family_[it->second].recipe;
}

double CautiousState::subset_probability(const FindingSet& subset) const {
  for (const auto& id : subset) finding_index(id);
  auto recipe = find_recipe(subset);
  if (!recipe) {
    std::string names;
    for (const auto& id : subset) names += (names.empty() ? "" : ",") + id;
    throw NotAccessible("evidence subset {" + names + "} is not accessible from the stored tables");
  }
  return clique_local_joint(recipe->clique, recipe->separators, recipe->findings).sum();
}

std::vector<double> CautiousState::marginal(VarId x) const {
  require_propagated();
  if (x < 0 || static_cast<std::size_t>(x) >= tree_->variables().size()) {
    throw EvidenceError("unknown variable " + std::to_string(x));
  }
  if (evidence_mass_ <= 0.0) throw ImpossibleEvidence("evidence has probability zero");
  const int v = tree_->smallest_clique_containing(x);
  const auto joint = full_local_product(v, nullptr);
  const auto m = marginalize(joint, subdomain(joint.domain(), std::vector<VarId>{x}));
  const double z = m.sum();
  if (z <= 0.0) throw ImpossibleEvidence("evidence has probability zero");
  std::vector<double> out = m.to_vector();
  for (double& p : out) p /= z;
  return out;
}

JunctionTree CautiousState::reinitialize() const {
  require_propagated();
  if (evidence_mass_ <= 0.0) throw ImpossibleEvidence("cannot condition on evidence of probability zero");
  const double inv = 1.0 / evidence_mass_;
  std::vector<Potential> cliques;
  for (const auto& c : tree_->cliques()) cliques.push_back(scaled(full_local_product(c.index, nullptr), inv));
  // P(e, S) = P(e_v | S) P(e_w | S) P(S)
  std::vector<Potential> seps;
  for (const auto& s : tree_->separators()) {
    auto t = multiply(message_ratio(s.index, Direction::toward_root), message_ratio(s.index, Direction::away_from_root));
    seps.push_back(scaled(multiply(t, s.baseline), inv));
  }
  return tree_->with_baselines(std::move(cliques), std::move(seps));
}

double CautiousState::what_if(std::string_view x, const Finding& y) const {
  require_propagated();
  const auto& old = finding(x);
  if (y.variable != old.finding.variable) {
    throw EvidenceError("what-if: replacement must be on the same variable as '" + std::string(x) + "'");
  }
  validate_finding(y, tree_->variables());
  const int v = old.attached_clique;
  const int card = tree_->variables()[static_cast<std::size_t>(y.variable)].cardinality();
  Potential t = tree_->clique(v).baseline;
  for (int s : tree_->incident(v)) t = multiply(t, message_ratio(s, incoming_direction(v, s)));
  for (const auto& m : findings_) {
    if (m.attached_clique != v) continue;
    t = multiply(t, m.finding.id == x ? finding_table(y, card) : m.table);
  }
  return t.sum();
}

StorageStats CautiousState::storage() const {
  StorageStats st;
  st.separators = mailboxes_.size();
  for (const auto& box : mailboxes_) {
    std::size_t filled = (box[0] ? 1 : 0) + (box[1] ? 1 : 0);
    st.message_tables += filled;
    st.max_messages_per_separator = std::max(st.max_messages_per_separator, filled);
  }
  st.finding_tables = findings_.size();
  return st;
}

}  // namespace cautious
