#pragma once

// Ground truth by enumerating the full joint distribution. Deliberately
// naive: plain loops over assignments, no use of the table operations.

#include <cstddef>
#include <span>
#include <vector>

#include "cautious/network.hpp"
#include "cautious/potential.hpp"

namespace cautious::oracle {

inline constexpr std::size_t kDefaultCap = std::size_t{1} << 20;

/// P(X_0, ..., X_{n-1}) over all variables in declaration order.
Potential joint(const BayesianNetwork& net, std::size_t cap = kDefaultCap);

/// P(e) = sum over the joint of the product of finding likelihoods.
double probability(const BayesianNetwork& net, std::span<const Finding> findings, std::size_t cap = kDefaultCap);

/// P(h | e). Throws ImpossibleEvidence when P(e) = 0.
double posterior(const BayesianNetwork& net, const Hypothesis& h, std::span<const Finding> findings,
                 std::size_t cap = kDefaultCap);

/// Unnormalized P(vars, e) as a table over `vars` in the given order.
Potential marginal(const BayesianNetwork& net, std::span<const VarId> vars, std::span<const Finding> findings,
                   std::size_t cap = kDefaultCap);

}  // namespace cautious::oracle
