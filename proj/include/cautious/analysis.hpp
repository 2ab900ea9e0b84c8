#pragma once

// Conflict and sensitivity analysis on top of propagated cautious states.
//
// The sensitivity routines take two states over the same findings: one on
// the clean tree and one on the tree conditioned on the hypothesis h (see
// condition_on_hypothesis). P(e'|h) comes from the second, P(e') from the
// first, and Bayes' rule gives P(h|e').

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cautious/cautious.hpp"

namespace cautious {

struct SensitivityThresholds {
  double theta1 = 0.2;  // importance
  double theta2 = 0.2;  // sufficiency
  double theta3 = 0.2;  // decisiveness

  void validate() const;
};

struct PartitionConflict {
  int separator = 0;
  FindingSet e_left;
  FindingSet e_right;
  double value = 0.0;
};

struct ConflictReport {
  double conf_value = 0.0;  // natural log
  double p_evidence = 0.0;
  std::map<std::string, double> finding_probabilities;
  // one entry per separator with evidence on both sides
  std::vector<PartitionConflict> partitions;
};

struct SubsetSensitivity {
  FindingSet findings;
  double p_e_prime = 0.0;
  double p_e_prime_given_h = 0.0;
  double p_h_given_e_prime = 0.0;
  double sufficiency_ratio = 0.0;             // P(h|e') / P(h|e)
  std::optional<double> importance_ratio;     // P(h|e\e') / P(h|e) when e\e' is accessible
  std::optional<bool> important;              // empty when not evaluable
  bool sufficient = false;
  bool minimal_sufficient = false;
  bool crucial = false;                        // nonempty and inside every sufficient set
  bool decisive = false;
};

struct SensitivityReport {
  Hypothesis hypothesis;
  SensitivityThresholds thresholds;
  double p_h = 0.0;
  double p_h_given_e = 0.0;
  std::vector<SubsetSensitivity> subsets;
  FindingSet crucial_findings;
};

/// ln(prod_f P(f) / P(e)).
ConflictReport conflict(const CautiousState& state);

/// ln(P(e1) P(e2) / P(e)) for a partition {e1, e2} of the evidence.
double partial_conflict(const CautiousState& state, const FindingSet& e1, const FindingSet& e2);

/// P(h | e') = P(e' | h) P(h) / P(e').
double posterior_given_subset(const CautiousState& clean, const CautiousState& conditioned, double p_h,
                              const FindingSet& e_prime);

SensitivityReport classify_sensitivity(const CautiousState& clean, const CautiousState& conditioned, double p_h,
                                       const SensitivityThresholds& t, const Hypothesis& h = {});

/// P(h | e with finding x replaced by y); no messages are sent.
double what_if_posterior(const CautiousState& clean, const CautiousState& conditioned, double p_h, std::string_view x,
                         const Finding& y);

}  // namespace cautious
