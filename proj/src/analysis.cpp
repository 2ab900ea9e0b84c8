#include "cautious/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace cautious {

void SensitivityThresholds::validate() const {
  for (double t : {theta1, theta2, theta3}) {
    if (!(t >= 0.0 && t <= 1.0)) throw EvidenceError("sensitivity thresholds must lie in [0, 1]");
  }
}

namespace {

double nonzero_evidence(const CautiousState& state) {
  const double pe = state.evidence_probability();
  if (pe <= 0.0) throw ImpossibleEvidence("evidence has probability zero");
  return pe;
}

FindingSet set_minus(const FindingSet& a, const FindingSet& b) {
  FindingSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

}  // namespace

ConflictReport conflict(const CautiousState& state) {
  ConflictReport r;
  r.p_evidence = nonzero_evidence(state);
  double log_product = 0.0;
  for (const auto& m : state.findings()) {
    const double p = state.subset_probability({m.finding.id});
    r.finding_probabilities[m.finding.id] = p;
    log_product += std::log(p);
  }
  r.conf_value = log_product - std::log(r.p_evidence);
  for (const auto& s : state.tree().separators()) {
    const auto split = state.separator_split(s.index);
    if (split.e_left.empty() || split.e_right.empty()) continue;
    r.partitions.push_back({s.index, split.e_left, split.e_right,
                            std::log(split.p_left) + std::log(split.p_right) - std::log(r.p_evidence)});
  }
  return r;
}

double partial_conflict(const CautiousState& state, const FindingSet& e1, const FindingSet& e2) {
  const double pe = nonzero_evidence(state);
  FindingSet joined;
  std::set_union(e1.begin(), e1.end(), e2.begin(), e2.end(), std::inserter(joined, joined.end()));
  if (joined.size() != e1.size() + e2.size() || joined != state.all_finding_ids()) {
    throw EvidenceError("partial conflict: the two sets must partition the entered evidence");
  }
  return std::log(state.subset_probability(e1)) + std::log(state.subset_probability(e2)) - std::log(pe);
}

double posterior_given_subset(const CautiousState& clean, const CautiousState& conditioned, double p_h,
                              const FindingSet& e_prime) {
  const double p_e = clean.subset_probability(e_prime);
  if (p_e <= 0.0) throw ImpossibleEvidence("posterior undefined: evidence subset has probability zero");
  return conditioned.subset_probability(e_prime) * p_h / p_e;
}

SensitivityReport classify_sensitivity(const CautiousState& clean, const CautiousState& conditioned, double p_h,
                                       const SensitivityThresholds& t, const Hypothesis& h) {
  t.validate();
  nonzero_evidence(clean);
  if (p_h <= 0.0) throw ImpossibleHypothesis("hypothesis has probability zero");
  if (clean.all_finding_ids() != conditioned.all_finding_ids()) {
    throw EvidenceError("sensitivity: clean and conditioned states hold different findings");
  }

  SensitivityReport r;
  r.hypothesis = h;
  r.thresholds = t;
  r.p_h = p_h;
  const FindingSet everything = clean.all_finding_ids();
  r.p_h_given_e = posterior_given_subset(clean, conditioned, p_h, everything);
  if (r.p_h_given_e <= 0.0) throw ImpossibleHypothesis("hypothesis has probability zero given the evidence");

  const auto family = clean.accessible_subsets();
  std::map<FindingSet, double> posterior_of;
  for (const auto& a : family) {
    SubsetSensitivity row;
    row.findings = a.findings;
    row.p_e_prime = clean.subset_probability(a.findings);
    row.p_e_prime_given_h = conditioned.subset_probability(a.findings);
    row.p_h_given_e_prime = row.p_e_prime_given_h * p_h / row.p_e_prime;
    row.sufficiency_ratio = row.p_h_given_e_prime / r.p_h_given_e;
    row.sufficient = row.sufficiency_ratio > 1.0 - t.theta2;
    row.decisive = row.p_h_given_e_prime > 1.0 - t.theta3;
    posterior_of[a.findings] = row.p_h_given_e_prime;
    r.subsets.push_back(std::move(row));
  }

  for (auto& row : r.subsets) {
    auto rest = posterior_of.find(set_minus(everything, row.findings));
    if (rest != posterior_of.end()) {
      row.importance_ratio = rest->second / r.p_h_given_e;
      row.important = *row.importance_ratio < 1.0 - t.theta1;
    }
  }

  // Minimality and cruciality are judged within the accessible family.
  std::vector<const FindingSet*> sufficient_sets;
  for (const auto& row : r.subsets) {
    if (row.sufficient) sufficient_sets.push_back(&row.findings);
  }
  for (auto& row : r.subsets) {
    if (!row.sufficient) continue;
    row.minimal_sufficient = std::none_of(sufficient_sets.begin(), sufficient_sets.end(), [&](const FindingSet* s) {
      return s->size() < row.findings.size() && std::includes(row.findings.begin(), row.findings.end(), s->begin(), s->end());
    });
  }
  FindingSet common = everything;
  for (const FindingSet* s : sufficient_sets) {
    FindingSet next;
    std::set_intersection(common.begin(), common.end(), s->begin(), s->end(), std::inserter(next, next.end()));
    common = std::move(next);
  }
  r.crucial_findings = common;
  for (auto& row : r.subsets) {
    row.crucial = !row.findings.empty() && std::includes(common.begin(), common.end(), row.findings.begin(), row.findings.end());
  }
  return r;
}

double what_if_posterior(const CautiousState& clean, const CautiousState& conditioned, double p_h, std::string_view x,
                         const Finding& y) {
  const double p_e = clean.what_if(x, y);
  if (p_e <= 0.0) throw ImpossibleEvidence("posterior undefined: the swapped evidence has probability zero");
  return conditioned.what_if(x, y) * p_h / p_e;
}

}  // namespace cautious
