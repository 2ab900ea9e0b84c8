#include <gtest/gtest.h>

#include <random>

#include "cautious/oracle.hpp"
#include "support/fixtures.hpp"

using namespace cautious;
namespace ct = cautious::testing;

TEST(Oracle, Chain3Joint) {
  const auto j = oracle::joint(ct::chain3());
  EXPECT_EQ(j.size(), 8u);
  EXPECT_NEAR(j.sum(), 1.0, 1e-12);
  // P(A=t, B=t, C=t) = 0.4 * 0.9 * 0.7
  EXPECT_NEAR(j[0], 0.252, 1e-15);
}

TEST(Oracle, IndependentVariablesGiveOuterProduct) {
  BayesianNetwork net({ct::binary("A"), ct::binary("B")}, {{}, {}}, {ct::table({0}, {0.3, 0.7}), ct::table({1}, {0.6, 0.4})});
  const auto j = oracle::joint(net);
  const std::vector<double> expected{0.18, 0.12, 0.42, 0.28};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(j[i], expected[i], 1e-15);
}

TEST(Oracle, CapIsEnforced) {
  EXPECT_THROW(oracle::joint(ct::chain3(), 4), CapacityError);
  EXPECT_THROW(oracle::probability(ct::chain3(), {}, 7), CapacityError);
}

TEST(Oracle, Chain3Probabilities) {
  const auto net = ct::chain3();
  EXPECT_DOUBLE_EQ(oracle::probability(net, {}), 1.0);
  const std::vector<Finding> b{ct::hard("b", 1, 0)};
  EXPECT_NEAR(oracle::probability(net, b), 0.48, 1e-15);
  const std::vector<Finding> bc{ct::hard("b", 1, 0), ct::hard("c", 2, 0)};
  EXPECT_NEAR(oracle::probability(net, bc), 0.336, 1e-15);
  const std::vector<Finding> c{ct::hard("c", 2, 0)};
  EXPECT_NEAR(oracle::probability(net, c), 0.388, 1e-15);
  const std::vector<Finding> ac{ct::hard("a", 0, 0), ct::hard("c", 2, 0)};
  EXPECT_NEAR(oracle::probability(net, ac), 0.256, 1e-15);
}

TEST(Oracle, Chain3Posteriors) {
  const auto net = ct::chain3();
  const Hypothesis a_true{{{0, 0}}};
  EXPECT_NEAR(oracle::posterior(net, a_true, {}), 0.4, 1e-15);
  const std::vector<Finding> b{ct::hard("b", 1, 0)};
  EXPECT_NEAR(oracle::posterior(net, a_true, b), 0.75, 1e-15);
  const std::vector<Finding> a_false{ct::hard("a", 0, 1)};
  EXPECT_EQ(oracle::posterior(net, a_true, a_false), 0.0);
  const std::vector<Finding> impossible{ct::hard("b1", 1, 0), ct::hard("b2", 1, 1)};
  EXPECT_THROW(oracle::posterior(net, a_true, impossible), ImpossibleEvidence);
}

TEST(Oracle, MarginalMatchesChainRule) {
  const auto net = ct::chain3();
  const std::vector<VarId> b{1};
  const auto pb = oracle::marginal(net, b, {});
  EXPECT_NEAR(pb[0], 0.4 * 0.9 + 0.6 * 0.2, 1e-12);
  const std::vector<VarId> c{2};
  const auto pc = oracle::marginal(net, c, {});
  EXPECT_NEAR(pc[0], 0.48 * 0.7 + 0.52 * 0.1, 1e-12);
}

// P(e) factorizes over disconnected components.
TEST(Oracle, FactorizesOverComponents) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto left = ct::random_network(rng, {.min_vars = 2, .max_vars = 4});
    const auto right = ct::random_network(rng, {.min_vars = 2, .max_vars = 4});
    // disjoint union, right's variables shifted
    std::vector<Variable> vars = left.variables();
    std::vector<std::vector<VarId>> parents;
    std::vector<Potential> cpts;
    const VarId shift = static_cast<VarId>(left.size());
    for (std::size_t v = 0; v < left.size(); ++v) {
      parents.push_back(left.parents(static_cast<VarId>(v)));
      cpts.push_back(left.cpt(static_cast<VarId>(v)));
    }
    for (std::size_t v = 0; v < right.size(); ++v) {
      vars.push_back(ct::binary("R" + std::to_string(v)));
      std::vector<VarId> ps;
      for (VarId p : right.parents(static_cast<VarId>(v))) ps.push_back(p + shift);
      parents.push_back(ps);
      std::vector<VarId> dv;
      for (VarId x : right.cpt(static_cast<VarId>(v)).domain().vars()) dv.push_back(x + shift);
      cpts.emplace_back(Domain(dv, right.cpt(static_cast<VarId>(v)).domain().cards()), right.cpt(static_cast<VarId>(v)).values());
    }
    const BayesianNetwork both(vars, parents, cpts);
    auto el = ct::random_evidence(rng, left);
    auto er = ct::random_evidence(rng, right);
    std::vector<Finding> all = el;
    for (auto f : er) {
      f.id = "r" + f.id;
      f.variable += shift;
      all.push_back(f);
    }
    EXPECT_NEAR(oracle::probability(both, all), oracle::probability(left, el) * oracle::probability(right, er), 1e-12);
  }
}
