#pragma once

// Test fixtures and generators shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "cautious/junction_tree.hpp"
#include "cautious/network.hpp"

namespace cautious::testing {

inline Variable binary(std::string name) { return {std::move(name), {"t", "f"}}; }

inline Potential table(std::vector<VarId> vars, std::vector<double> values, std::vector<int> cards = {}) {
  if (cards.empty()) cards.assign(vars.size(), 2);
  return Potential(Domain(std::move(vars), std::move(cards)), std::span<const double>(values));
}

// A -> B -> C with P(A=t)=0.4, P(B=t|A=t)=0.9, P(B=t|A=f)=0.2,
// P(C=t|B=t)=0.7, P(C=t|B=f)=0.1.
inline BayesianNetwork chain3(double c_given_b_false = 0.1) {
  return BayesianNetwork({binary("A"), binary("B"), binary("C")}, {{}, {0}, {1}},
                         {table({0}, {0.4, 0.6}), table({1, 0}, {0.9, 0.2, 0.1, 0.8}),
                          table({2, 1}, {0.7, c_given_b_false, 0.3, 1.0 - c_given_b_false})});
}

inline const char* kChain3Document = R"({
  "variables": [
    {"name": "A", "states": ["t", "f"]},
    {"name": "B", "states": ["t", "f"]},
    {"name": "C", "states": ["t", "f"]}
  ],
  "cpds": [
    {"variable": "A", "parents": [], "values": [0.4, 0.6]},
    {"variable": "B", "parents": ["A"], "values": [0.9, 0.2, 0.1, 0.8]},
    {"variable": "C", "parents": ["B"], "values": [0.7, 0.1, 0.3, 0.9]}
  ]
})";

// A -> B -> C -> D; cliques {A,B}, {B,C}, {C,D}.
inline BayesianNetwork chain4() {
  return BayesianNetwork({binary("A"), binary("B"), binary("C"), binary("D")}, {{}, {0}, {1}, {2}},
                         {table({0}, {0.3, 0.7}), table({1, 0}, {0.8, 0.25, 0.2, 0.75}),
                          table({2, 1}, {0.6, 0.15, 0.4, 0.85}), table({3, 2}, {0.9, 0.35, 0.1, 0.65})});
}

inline Finding hard(const std::string& id, VarId v, int state, int card = 2) {
  return Finding::hard(id, v, state, card);
}

inline Finding soft(const std::string& id, VarId v, std::vector<double> likelihood) {
  return Finding{id, v, std::move(likelihood)};
}

struct RandomOptions {
  int min_vars = 2;
  int max_vars = 8;
  int max_parents = 3;
  double parent_probability = 0.45;
  double deterministic_column_probability = 0.0;
  double evidence_probability = 0.5;
  double soft_probability = 0.35;
  double duplicate_probability = 0.1;
};

// Random DAG over binary variables, declared in a shuffled topological order.
inline BayesianNetwork random_network(std::mt19937_64& rng, const RandomOptions& opt = {}) {
  std::uniform_int_distribution<int> size_dist(opt.min_vars, opt.max_vars);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = size_dist(rng);
  std::vector<Variable> vars;
  for (int i = 0; i < n; ++i) vars.push_back(binary("X" + std::to_string(i)));
  std::vector<int> topo(static_cast<std::size_t>(n));
  std::iota(topo.begin(), topo.end(), 0);
  std::shuffle(topo.begin(), topo.end(), rng);

  std::vector<std::vector<VarId>> parents(static_cast<std::size_t>(n));
  std::vector<Potential> cpts;
  for (int pos = 0; pos < n; ++pos) {
    const int v = topo[static_cast<std::size_t>(pos)];
    for (int q = 0; q < pos; ++q) {
      if (static_cast<int>(parents[static_cast<std::size_t>(v)].size()) < opt.max_parents && unit(rng) < opt.parent_probability) {
        parents[static_cast<std::size_t>(v)].push_back(topo[static_cast<std::size_t>(q)]);
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    std::vector<VarId> family{v};
    for (VarId p : parents[static_cast<std::size_t>(v)]) family.push_back(p);
    const std::size_t columns = std::size_t{1} << parents[static_cast<std::size_t>(v)].size();
    std::vector<double> values(2 * columns);
    for (std::size_t c = 0; c < columns; ++c) {
      double p;
      if (unit(rng) < opt.deterministic_column_probability) {
        p = unit(rng) < 0.5 ? 0.0 : 1.0;
      } else {
        p = 0.05 + 0.9 * unit(rng);
      }
      values[c] = p;
      values[columns + c] = 1.0 - p;
    }
    cpts.push_back(table(family, values));
  }
  return BayesianNetwork(std::move(vars), std::move(parents), std::move(cpts));
}

inline std::vector<Finding> random_evidence(std::mt19937_64& rng, const BayesianNetwork& net, const RandomOptions& opt = {}) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Finding> out;
  int next = 0;
  for (std::size_t v = 0; v < net.size(); ++v) {
    if (unit(rng) >= opt.evidence_probability) continue;
    const int copies = unit(rng) < opt.duplicate_probability ? 2 : 1;
    for (int c = 0; c < copies; ++c) {
      const std::string id = "f" + std::to_string(next++);
      if (unit(rng) < opt.soft_probability) {
        out.push_back(soft(id, static_cast<VarId>(v), {0.05 + unit(rng), 0.05 + unit(rng)}));
      } else {
        out.push_back(hard(id, static_cast<VarId>(v), unit(rng) < 0.5 ? 0 : 1));
      }
    }
  }
  return out;
}

// Synthetic tree with n cliques: m = (n-2)/(k-1) internal cliques of degree k
// joined in a path (indices 0..m-1, root 0), the rest leaves. Every clique
// has a private binary variable "P<i>"; every edge a binary variable "E<j>".
// Potentials are random and strictly positive.
struct SyntheticTree {
  JunctionTree tree;
  std::vector<VarId> private_var;  // per clique
};

inline SyntheticTree synthetic_tree(int n, int k, std::mt19937_64& rng) {
  const int m = (n - 2) / (k - 1);
  std::vector<std::pair<int, int>> edges;
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  for (int i = 0; i + 1 < m; ++i) {
    edges.emplace_back(i, i + 1);
    ++degree[static_cast<std::size_t>(i)];
    ++degree[static_cast<std::size_t>(i + 1)];
  }
  int next_leaf = m;
  for (int i = 0; i < m; ++i) {
    while (degree[static_cast<std::size_t>(i)] < k) {
      edges.emplace_back(i, next_leaf);
      ++degree[static_cast<std::size_t>(i)];
      ++degree[static_cast<std::size_t>(next_leaf)];
      ++next_leaf;
    }
  }
  std::vector<Variable> vars;
  std::vector<std::vector<VarId>> clique_vars(static_cast<std::size_t>(n));
  SyntheticTree out;
  for (int c = 0; c < n; ++c) {
    out.private_var.push_back(static_cast<VarId>(vars.size()));
    clique_vars[static_cast<std::size_t>(c)].push_back(static_cast<VarId>(vars.size()));
    vars.push_back(binary("P" + std::to_string(c)));
  }
  for (std::size_t j = 0; j < edges.size(); ++j) {
    const VarId e = static_cast<VarId>(vars.size());
    vars.push_back(binary("E" + std::to_string(j)));
    clique_vars[static_cast<std::size_t>(edges[j].first)].push_back(e);
    clique_vars[static_cast<std::size_t>(edges[j].second)].push_back(e);
  }
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  std::vector<Potential> potentials;
  for (const auto& cv : clique_vars) {
    Domain d(cv, std::vector<int>(cv.size(), 2));
    std::vector<double> values(d.num_cells());
    for (double& x : values) x = unit(rng);
    potentials.emplace_back(d, std::span<const double>(values));
  }
  out.tree = initialize_consistent(JunctionTree::from_parts(vars, potentials, edges));
  return out;
}

inline bool close_rel(double a, double b, double tol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= tol * scale || std::abs(a - b) <= 1e-300;
}

}  // namespace cautious::testing
