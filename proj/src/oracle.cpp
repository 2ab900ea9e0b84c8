#include "cautious/oracle.hpp"

namespace cautious::oracle {

namespace {

std::size_t state_space(const BayesianNetwork& net, std::size_t cap) {
  std::size_t n = 1;
  for (const auto& v : net.variables()) {
    n *= static_cast<std::size_t>(v.cardinality());
    if (n > cap) throw CapacityError("oracle: joint state space exceeds the enumeration cap");
  }
  return n;
}

// Calls fn(assignment, probability) for every full assignment, first
// variable slowest.
template <typename Fn>
void enumerate(const BayesianNetwork& net, std::size_t cap, Fn&& fn) {
  const std::size_t total = state_space(net, cap);
  const std::size_t n = net.size();
  std::vector<int> x(n, 0);
  for (std::size_t cell = 0; cell < total; ++cell) {
    double p = 1.0;
    for (std::size_t v = 0; v < n && p != 0.0; ++v) {
      const auto& cpt = net.cpt(static_cast<VarId>(v));
      const auto& d = cpt.domain();
      std::size_t idx = 0;
      for (std::size_t k = 0; k < d.arity(); ++k) {
        idx = idx * static_cast<std::size_t>(d.cards()[k]) + static_cast<std::size_t>(x[static_cast<std::size_t>(d.vars()[k])]);
      }
      p *= cpt[idx];
    }
    fn(x, p);
    for (std::size_t v = n; v-- > 0;) {
      if (++x[v] < net.variables()[v].cardinality()) break;
      x[v] = 0;
    }
  }
}

double likelihood(const std::vector<int>& x, std::span<const Finding> findings) {
  double w = 1.0;
  for (const auto& f : findings) {
    w *= f.likelihood.at(static_cast<std::size_t>(x[static_cast<std::size_t>(f.variable)]));
  }
  return w;
}

}  // namespace

Potential joint(const BayesianNetwork& net, std::size_t cap) {
  std::vector<double> values;
  values.reserve(state_space(net, cap));
  enumerate(net, cap, [&](const std::vector<int>&, double p) { values.push_back(p); });
  std::vector<VarId> vars(net.size());
  for (std::size_t v = 0; v < net.size(); ++v) vars[v] = static_cast<VarId>(v);
  return Potential(Domain(vars, net.cardinalities()), std::span<const double>(values));
}

double probability(const BayesianNetwork& net, std::span<const Finding> findings, std::size_t cap) {
  for (const auto& f : findings) validate_finding(f, net.variables());
  double total = 0.0;
  enumerate(net, cap, [&](const std::vector<int>& x, double p) { total += p * likelihood(x, findings); });
  return total;
}

double posterior(const BayesianNetwork& net, const Hypothesis& h, std::span<const Finding> findings, std::size_t cap) {
  validate_hypothesis(h, net.variables());
  for (const auto& f : findings) validate_finding(f, net.variables());
  double evidence = 0.0, joint_h = 0.0;
  enumerate(net, cap, [&](const std::vector<int>& x, double p) {
    const double w = p * likelihood(x, findings);
    evidence += w;
    bool match = true;
    for (auto [v, s] : h.assignments) match = match && x[static_cast<std::size_t>(v)] == s;
    if (match) joint_h += w;
  });
  if (evidence <= 0.0) throw ImpossibleEvidence("oracle: evidence has probability zero");
  return joint_h / evidence;
}

Potential marginal(const BayesianNetwork& net, std::span<const VarId> vars, std::span<const Finding> findings,
                   std::size_t cap) {
  for (const auto& f : findings) validate_finding(f, net.variables());
  std::vector<int> cards;
  for (VarId v : vars) {
    if (v < 0 || static_cast<std::size_t>(v) >= net.size()) throw StructuralError("oracle: unknown variable");
    cards.push_back(net.variables()[static_cast<std::size_t>(v)].cardinality());
  }
  Domain d(std::vector<VarId>(vars.begin(), vars.end()), cards);
  std::vector<double> values(d.num_cells(), 0.0);
  enumerate(net, cap, [&](const std::vector<int>& x, double p) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < vars.size(); ++k) {
      idx = idx * static_cast<std::size_t>(cards[k]) + static_cast<std::size_t>(x[static_cast<std::size_t>(vars[k])]);
    }
    values[idx] += p * likelihood(x, findings);
  });
  return Potential(std::move(d), std::span<const double>(values));
}

}  // namespace cautious::oracle
