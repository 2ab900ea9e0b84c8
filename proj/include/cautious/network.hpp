#pragma once

// Discrete Bayesian networks, findings and hypotheses, plus their JSON
// document formats.
//
// Model document:
//   { "variables": [ {"name": "A", "states": ["t", "f"]}, ... ],
//     "cpds": [ {"variable": "B", "parents": ["A"], "values": [...]}, ... ] }
// `values` is row-major over [variable, parents...] with the child slowest.
//
// Evidence document: a list of {"id", "variable", "likelihood": [...]} or
// {"id", "variable", "state"} (hard finding).

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cautious/potential.hpp"

namespace cautious {

struct Variable {
  std::string name;
  std::vector<std::string> states;

  int cardinality() const { return static_cast<int>(states.size()); }
  int state_index(std::string_view label) const;

  friend bool operator==(const Variable&, const Variable&) = default;
};

/// Index of the variable called `name`, or -1.
int find_variable(std::span<const Variable> vars, std::string_view name);

class BayesianNetwork {
 public:
  BayesianNetwork() = default;

  /// Validates and takes ownership. `parents[i]` lists parents of variable i;
  /// `cpts[i]` must be over [i, parents[i]...].
  BayesianNetwork(std::vector<Variable> variables, std::vector<std::vector<VarId>> parents,
                  std::vector<Potential> cpts);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<VarId>& parents(VarId v) const { return parents_.at(static_cast<std::size_t>(v)); }
  const Potential& cpt(VarId v) const { return cpts_.at(static_cast<std::size_t>(v)); }
  std::size_t size() const { return variables_.size(); }
  std::vector<int> cardinalities() const;

  friend bool operator==(const BayesianNetwork&, const BayesianNetwork&) = default;

 private:
  std::vector<Variable> variables_;
  std::vector<std::vector<VarId>> parents_;
  std::vector<Potential> cpts_;
};

struct Finding {
  std::string id;
  VarId variable = -1;
  std::vector<double> likelihood;

  static Finding hard(std::string id, VarId variable, int state, int cardinality);

  friend bool operator==(const Finding&, const Finding&) = default;
};

/// Checks the likelihood length against the variable and that some entry is positive.
void validate_finding(const Finding& f, std::span<const Variable> vars);

/// The finding's table F_f over its single variable.
Potential finding_table(const Finding& f, int cardinality);

struct Hypothesis {
  std::vector<std::pair<VarId, int>> assignments;  // (variable, state)

  bool empty() const { return assignments.empty(); }
};

void validate_hypothesis(const Hypothesis& h, std::span<const Variable> vars);

/// Parses "VAR=state[,VAR=state...]".
Hypothesis parse_hypothesis(std::string_view text, std::span<const Variable> vars);

BayesianNetwork parse_network(std::string_view document);
std::string serialize_network(const BayesianNetwork& net);

std::vector<Finding> parse_evidence(std::string_view document, std::span<const Variable> vars);
std::string serialize_evidence(std::span<const Finding> findings, std::span<const Variable> vars);

}  // namespace cautious
