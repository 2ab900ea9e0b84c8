#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "cautious/analysis.hpp"
#include "cautious/hugin.hpp"
#include "cautious/oracle.hpp"
#include "support/fixtures.hpp"

using namespace cautious;
namespace ct = cautious::testing;

namespace {

std::shared_ptr<const JunctionTree> compiled(const BayesianNetwork& net) {
  return std::make_shared<const JunctionTree>(compile(net));
}

CautiousState propagated(std::shared_ptr<const JunctionTree> jt, const std::vector<Finding>& ev) {
  CautiousState s(std::move(jt));
  for (const auto& f : ev) s.enter_finding(f);
  s.propagate();
  return s;
}

struct Pair {
  CautiousState clean;
  CautiousState cond;
  double p_h;
};

Pair make_pair(const BayesianNetwork& net, const Hypothesis& h, const std::vector<Finding>& ev) {
  const auto jt = compiled(net);
  auto c = condition_on_hypothesis(jt, h);
  return {propagated(jt, ev), propagated(std::make_shared<const JunctionTree>(std::move(c.conditioned)), ev), c.p_h};
}

const SubsetSensitivity& entry(const SensitivityReport& r, const FindingSet& ids) {
  for (const auto& s : r.subsets) {
    if (s.findings == ids) return s;
  }
  throw std::runtime_error("subset missing from report");
}

}  // namespace

TEST(Conflict, SingleFindingIsZero) {
  const auto r = conflict(propagated(compiled(ct::chain3()), {ct::hard("b", 1, 0)}));
  EXPECT_NEAR(r.conf_value, 0.0, 1e-12);
}

TEST(Conflict, Chain3) {
  const auto r = conflict(propagated(compiled(ct::chain3()), {ct::hard("b", 1, 0), ct::hard("c", 2, 0)}));
  EXPECT_NEAR(r.conf_value, std::log(0.48 * 0.388 / 0.336), 1e-12);
  EXPECT_NEAR(r.conf_value, -0.5901, 1e-4);
  EXPECT_NEAR(r.p_evidence, 0.336, 1e-12);
  EXPECT_NEAR(r.finding_probabilities.at("b"), 0.48, 1e-12);
  EXPECT_NEAR(r.finding_probabilities.at("c"), 0.388, 1e-12);
}

TEST(Conflict, DisconnectedFindingsAreIndependent) {
  BayesianNetwork net({ct::binary("A"), ct::binary("B")}, {{}, {}}, {ct::table({0}, {0.3, 0.7}), ct::table({1}, {0.6, 0.4})});
  const auto r = conflict(propagated(compiled(net), {ct::hard("a", 0, 0), ct::hard("b", 1, 1)}));
  EXPECT_NEAR(r.conf_value, 0.0, 1e-12);
}

TEST(Conflict, ImpossibleEvidenceThrows) {
  EXPECT_THROW(conflict(propagated(compiled(ct::chain3()), {ct::hard("b1", 1, 0), ct::hard("b2", 1, 1)})),
               ImpossibleEvidence);
}

TEST(PartialConflict, Chain3) {
  const auto s = propagated(compiled(ct::chain3()), {ct::hard("a", 0, 0), ct::hard("c", 2, 0)});
  EXPECT_NEAR(partial_conflict(s, {"a"}, {"c"}), std::log(0.4 * 0.388 / 0.256), 1e-12);
  EXPECT_NEAR(partial_conflict(s, {"a"}, {"c"}), -0.5004, 1e-4);
  EXPECT_NEAR(partial_conflict(s, {}, {"a", "c"}), 0.0, 1e-12);
  EXPECT_THROW(partial_conflict(s, {"a"}, {}), EvidenceError);
  EXPECT_THROW(partial_conflict(s, {"a"}, {"a", "c"}), EvidenceError);
  const auto r = conflict(s);
  ASSERT_EQ(r.partitions.size(), 1u);
  EXPECT_NEAR(r.partitions[0].value, std::log(0.4 * 0.388 / 0.256), 1e-12);
}

TEST(PartialConflict, NonAccessiblePartThrows) {
  const auto s = propagated(compiled(ct::chain4()), {ct::hard("a", 0, 0), ct::hard("b", 1, 1), ct::hard("c", 2, 0), ct::hard("d", 3, 1)});
  EXPECT_THROW(partial_conflict(s, {"b", "d"}, {"a", "c"}), NotAccessible);
}

TEST(PartialConflict, FactorizingEvidenceIsZero) {
  BayesianNetwork net({ct::binary("A"), ct::binary("B"), ct::binary("C")}, {{}, {}, {1}},
                      {ct::table({0}, {0.3, 0.7}), ct::table({1}, {0.6, 0.4}), ct::table({2, 1}, {0.2, 0.7, 0.8, 0.3})});
  const auto s = propagated(compiled(net), {ct::hard("a", 0, 0), ct::hard("c", 2, 1)});
  EXPECT_NEAR(partial_conflict(s, {"a"}, {"c"}), 0.0, 1e-12);
}

TEST(PosteriorGivenSubset, Chain3) {
  const auto net = ct::chain3();
  const Hypothesis h{{{0, 0}}};
  const std::vector<Finding> ev{ct::hard("c", 2, 0)};
  const auto p = make_pair(net, h, ev);
  EXPECT_NEAR(posterior_given_subset(p.clean, p.cond, p.p_h, {}), 0.4, 1e-12);
  EXPECT_NEAR(posterior_given_subset(p.clean, p.cond, p.p_h, {"c"}), 0.256 / 0.388, 1e-12);
  EXPECT_NEAR(posterior_given_subset(p.clean, p.cond, p.p_h, {"c"}), p.clean.marginal(0)[0], 1e-9);
}

TEST(PosteriorGivenSubset, FullSetMatchesHuginOnRandomNetworks) {
  std::mt19937_64 rng(59);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    const auto net = ct::random_network(rng);
    const auto ev = ct::random_evidence(rng, net);
    const Hypothesis h{{{0, 0}}};
    if (oracle::probability(net, ev) <= 0.0) continue;
    const auto p = make_pair(net, h, ev);
    HuginState hs(compiled(net));
    for (const auto& f : ev) hs.enter_finding(f);
    hs.propagate();
    EXPECT_NEAR(posterior_given_subset(p.clean, p.cond, p.p_h, p.clean.all_finding_ids()), hs.marginal(0)[0], 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(Sensitivity, Chain3Fixture) {
  const auto net = ct::chain3();
  const Hypothesis h{{{0, 0}}};
  const std::vector<Finding> ev{ct::hard("b", 1, 0), ct::hard("c", 2, 0)};
  const auto p = make_pair(net, h, ev);
  const auto r = classify_sensitivity(p.clean, p.cond, p.p_h, {}, h);
  EXPECT_NEAR(r.p_h, 0.4, 1e-12);
  EXPECT_NEAR(r.p_h_given_e, 0.75, 1e-12);
  ASSERT_EQ(r.subsets.size(), 4u);

  const auto& none = entry(r, {});
  const auto& b = entry(r, {"b"});
  const auto& c = entry(r, {"c"});
  const auto& bc = entry(r, {"b", "c"});
  EXPECT_NEAR(none.p_h_given_e_prime, 0.4, 1e-12);
  EXPECT_NEAR(b.p_h_given_e_prime, 0.75, 1e-12);
  EXPECT_NEAR(c.p_h_given_e_prime, 0.256 / 0.388, 1e-12);
  EXPECT_NEAR(bc.p_h_given_e_prime, 0.75, 1e-12);

  EXPECT_FALSE(none.sufficient);
  EXPECT_TRUE(b.sufficient);
  EXPECT_TRUE(c.sufficient);
  EXPECT_TRUE(bc.sufficient);
  EXPECT_TRUE(b.minimal_sufficient);
  EXPECT_TRUE(c.minimal_sufficient);
  EXPECT_FALSE(bc.minimal_sufficient);
  EXPECT_TRUE(r.crucial_findings.empty());
  for (const auto& s : r.subsets) {
    EXPECT_FALSE(s.crucial);
    EXPECT_FALSE(s.decisive);
  }
  EXPECT_EQ(b.important, std::optional<bool>(false));
  EXPECT_EQ(c.important, std::optional<bool>(false));
  EXPECT_EQ(bc.important, std::optional<bool>(true));
}

TEST(Sensitivity, FullSetAlwaysSufficientAndDecisiveThreshold) {
  const auto net = ct::chain3();
  const Hypothesis h{{{0, 0}}};
  const std::vector<Finding> ev{ct::hard("b", 1, 0), ct::hard("c", 2, 0)};
  const auto p = make_pair(net, h, ev);
  const auto loose = classify_sensitivity(p.clean, p.cond, p.p_h, {0.2, 0.01, 0.3}, h);
  EXPECT_TRUE(entry(loose, {"b", "c"}).sufficient);
  EXPECT_TRUE(entry(loose, {"b", "c"}).decisive);  // 0.75 > 0.7
  const auto tight = classify_sensitivity(p.clean, p.cond, p.p_h, {0.2, 0.2, 0.24}, h);
  EXPECT_FALSE(entry(tight, {"b", "c"}).decisive);  // 0.75 < 0.76
  EXPECT_THROW(classify_sensitivity(p.clean, p.cond, p.p_h, {1.5, 0.2, 0.2}, h), Error);
}

TEST(Sensitivity, CrucialFindingWhenOnlyOneSetSuffices) {
  // B alone carries the evidence; C on a separate root only contributes noise
  BayesianNetwork net({ct::binary("A"), ct::binary("B"), ct::binary("C")}, {{}, {0}, {}},
                      {ct::table({0}, {0.4, 0.6}), ct::table({1, 0}, {0.9, 0.2, 0.1, 0.8}), ct::table({2}, {0.5, 0.5})});
  const Hypothesis h{{{0, 0}}};
  const auto p = make_pair(net, h, {ct::hard("b", 1, 0), ct::hard("c", 2, 0)});
  const auto r = classify_sensitivity(p.clean, p.cond, p.p_h, {}, h);
  EXPECT_EQ(r.crucial_findings, (FindingSet{"b"}));
  EXPECT_TRUE(entry(r, {"b"}).crucial);
  EXPECT_FALSE(entry(r, {"c"}).sufficient);
}

TEST(Sensitivity, MatchesOracleOnRandomNetworks) {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 40; ++i) {
    const auto net = ct::random_network(rng);
    const auto ev = ct::random_evidence(rng, net, {.soft_probability = 0.5});
    const Hypothesis h{{{0, 1}}};
    if (oracle::probability(net, ev) <= 0.0) continue;
    const auto p = make_pair(net, h, ev);
    if (p.clean.marginal(0)[1] <= 0.0) continue;
    const auto r = classify_sensitivity(p.clean, p.cond, p.p_h, {}, h);
    for (const auto& s : r.subsets) {
      std::vector<Finding> sub;
      for (const auto& f : ev) {
        if (s.findings.count(f.id)) sub.push_back(f);
      }
      if (oracle::probability(net, sub) <= 0.0) continue;
      EXPECT_NEAR(s.p_h_given_e_prime, oracle::posterior(net, h, sub), 1e-9);
    }
  }
}

TEST(WhatIfPosterior, Chain3) {
  const auto net = ct::chain3();
  const Hypothesis h{{{0, 0}}};
  {
    auto p = make_pair(net, h, {ct::hard("c", 2, 0)});
    const auto sent = p.clean.counters().messages_sent + p.cond.counters().messages_sent;
    EXPECT_NEAR(what_if_posterior(p.clean, p.cond, p.p_h, "c", ct::hard("c", 2, 1)), 0.144 / 0.612, 1e-12);
    EXPECT_NEAR(what_if_posterior(p.clean, p.cond, p.p_h, "c", ct::hard("c", 2, 0)), p.clean.marginal(0)[0], 1e-12);
    EXPECT_EQ(p.clean.counters().messages_sent + p.cond.counters().messages_sent, sent);
  }
  {
    // C is independent of A given B
    auto p = make_pair(net, h, {ct::hard("b", 1, 0), ct::hard("c", 2, 0)});
    EXPECT_NEAR(what_if_posterior(p.clean, p.cond, p.p_h, "c", ct::hard("c", 2, 1)), 0.75, 1e-12);
  }
}
