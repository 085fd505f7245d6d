#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fishmonger/errors.hpp"
#include "fishmonger/mechanism.hpp"
#include "oracles.hpp"

using namespace fishmonger;

namespace {

const RewardCurve& rational() {
  static const RewardCurve rc(AcceptanceCurve::rational());
  return rc;
}

// Brings a fresh state to estimate `q` with one accepted adaptation offer.
MechanismState at_estimate(double q) {
  MechanismState s;
  s.issue(Branch::kAdaptation, q);
  s.apply_decision(true);
  return s;
}

}  // namespace

TEST(Demote, LiteralFormulaExample) {
  const std::vector<PricedDecision> h{{0.5, true}, {1.2, false}, {0.9, false}, {0.8, true}};
  // Any estimate above the candidate keeps the literal midpoint.
  EXPECT_EQ(demote(h, 2.0), 1.05);
  EXPECT_EQ(demote(h, 2.0), (0.9 + 1.2) / 2);
}

TEST(Demote, PaddingThenFallback) {
  const std::vector<PricedDecision> h{{0.5, true}, {0.5, false}};
  EXPECT_EQ(demote(h, 0.5), 0.5 * 2.0 / 3.0);
}

TEST(Demote, SingleRefusedPrice) {
  const std::vector<PricedDecision> h{{0.7, false}};
  EXPECT_EQ(demote(h, 0.7), 0.35);
}

TEST(Demote, FallbackWhenCandidateNotBelowEstimate) {
  const std::vector<PricedDecision> h{{0.5, true}, {1.2, false}, {0.9, false}, {0.8, true}};
  EXPECT_DOUBLE_EQ(demote(h, 0.9), 0.72);
}

TEST(Demote, Errors) {
  EXPECT_THROW(demote({}, 1.0), ProtocolError);
  const std::vector<PricedDecision> all_accepted{{0.5, true}};
  EXPECT_THROW(demote(all_accepted, 1.0), ProtocolError);
}

TEST(Demote, AgreesWithFullSortOnRandomHistories) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> price(0.0, 5.0);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t n = 1 + gen() % 40;
    std::vector<PricedDecision> h;
    std::vector<double> prices;
    std::vector<int> decisions;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse prices so ties show up.
      const double p = std::round(price(gen) * 4.0) / 4.0;
      const bool a = i + 1 < n && gen() % 2;
      h.push_back({p, a});
      prices.push_back(p);
      decisions.push_back(a);
    }
    const double estimate = price(gen);
    const double got = demote(h, estimate);
    EXPECT_EQ(got, oracle::demote(prices, decisions, estimate));
    EXPECT_LT(got, estimate);
  }
}

TEST(Propose, FirstOfferIsAdaptationInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    MechanismState s;
    RandomStream rng(seed);
    const PriceOffer& o = s.propose(rational(), rng);
    EXPECT_EQ(o.branch, Branch::kAdaptation);
    EXPECT_GE(o.price, 0.0);
    EXPECT_LT(o.price, 1.0);
    EXPECT_EQ(o.round, 0u);
  }
}

TEST(Propose, BranchFrequenciesAtEstimateOne) {
  MechanismState s = at_estimate(1.0);
  RandomStream rng(2024);
  std::array<std::size_t, 3> counts{};
  const std::size_t draws = 1000000;
  for (std::size_t i = 0; i < draws; ++i) {
    const PriceOffer& o = s.propose(rational(), rng);
    ++counts[static_cast<int>(o.branch)];
    // Refusing adaptation and accepting anything else keeps q_n at 1.
    s.apply_decision(o.branch != Branch::kAdaptation);
  }
  ASSERT_EQ(s.estimate(), 1.0);
  EXPECT_NEAR(counts[0] / double(draws), 0.5, 0.002);
  EXPECT_NEAR(counts[1] / double(draws), 0.306853, 0.002);
  EXPECT_NEAR(counts[2] / double(draws), 0.193147, 0.002);
}

TEST(Propose, PendingOfferBlocksAnotherProposal) {
  MechanismState s;
  RandomStream rng(1);
  s.propose(rational(), rng);
  EXPECT_THROW(s.propose(rational(), rng), ProtocolError);
}

TEST(Issue, BranchPriceRules) {
  MechanismState s = at_estimate(0.9);
  s.issue(Branch::kAdaptation, 1.4);
  s.apply_decision(true);
  EXPECT_EQ(s.issue(Branch::kConfirmation, 1.4).price, 1.4);
  s.apply_decision(true);
  EXPECT_THROW(s.issue(Branch::kReward, 0.1), ProtocolError);
  EXPECT_THROW(s.issue(Branch::kConfirmation, 1.3), ProtocolError);
  EXPECT_THROW(s.issue(Branch::kAdaptation, 2.5), ProtocolError);
  EXPECT_THROW(s.issue(Branch::kAdaptation, 1.3), ProtocolError);
}

TEST(ApplyDecision, AdaptationAccepted) {
  MechanismState s;
  s.issue(Branch::kAdaptation, 0.37);
  EXPECT_EQ(s.apply_decision(true), 0.37);
  EXPECT_EQ(s.round(), 1u);
  EXPECT_EQ(s.accepted_count(), 1u);
}

TEST(ApplyDecision, AdaptationRefusedKeepsEstimate) {
  MechanismState s = at_estimate(0.8);
  s.issue(Branch::kAdaptation, 1.5);
  EXPECT_EQ(s.apply_decision(false), 0.8);
}

TEST(ApplyDecision, RewardNeverMovesEstimate) {
  MechanismState s = at_estimate(0.8);
  s.issue(Branch::kReward, 0.0);
  EXPECT_EQ(s.apply_decision(true), 0.8);
  s.issue(Branch::kReward, 0.0);
  EXPECT_EQ(s.apply_decision(false), 0.8);
}

TEST(ApplyDecision, ConfirmationRefusalDemotesThroughHistory) {
  // History prices 0.5 (accepted), 1.2 (refused), 0.9 (accepted, sets q_n),
  // then a refused confirmation at 0.9: k = 2 of n = 4.
  MechanismState s;
  s.issue(Branch::kAdaptation, 0.5);
  s.apply_decision(true);
  s.issue(Branch::kAdaptation, 1.2);
  s.apply_decision(false);
  s.issue(Branch::kAdaptation, 0.9);
  s.apply_decision(true);
  s.issue(Branch::kConfirmation, 0.9);
  const double next = s.apply_decision(false);
  const std::vector<PricedDecision> h{{0.5, true}, {1.2, false}, {0.9, true}, {0.9, false}};
  EXPECT_EQ(next, demote(h, 0.9));
  EXPECT_LT(next, 0.9);
}

TEST(ApplyDecision, NoPendingOfferIsProtocolError) {
  MechanismState s;
  EXPECT_THROW(s.apply_decision(true), ProtocolError);
}

TEST(MechanismProperties, NaiveCookEstimateMonotoneAndBounded) {
  for (double q : {0.3, 1.0, 4.0}) {
    MechanismState s;
    RandomStream rng(99);
    double last = 0.0;
    for (int n = 0; n < 20000; ++n) {
      const PriceOffer& o = s.propose(rational(), rng);
      EXPECT_GE(o.price, 0.0);
      if (o.branch == Branch::kAdaptation) {
        EXPECT_GE(o.price, s.estimate());
        EXPECT_LE(o.price, s.estimate() + 1.0);
      }
      const bool accept = o.price <= q;
      if (o.branch == Branch::kConfirmation) ASSERT_TRUE(accept);
      s.apply_decision(accept);
      ASSERT_GE(s.estimate(), last);
      ASSERT_LE(s.estimate(), q);
      last = s.estimate();
    }
  }
}

TEST(MechanismProperties, ConfirmationRefusalAlwaysStrictlyLowers) {
  std::mt19937_64 coin(5);
  MechanismState s;
  RandomStream rng(17);
  int refusals = 0;
  for (int n = 0; n < 50000; ++n) {
    const PriceOffer& o = s.propose(rational(), rng);
    const Branch branch = o.branch;
    const double before = s.estimate();
    const bool accept = coin() % 3 != 0;
    const double after = s.apply_decision(accept);
    if (branch == Branch::kConfirmation && !accept) {
      ++refusals;
      ASSERT_LT(after, before);
      ASSERT_GE(after, 0.0);
    }
  }
  EXPECT_GT(refusals, 100);
}

TEST(MechanismProperties, ReplayIsBitIdentical) {
  auto play = [](std::uint64_t seed) {
    MechanismState s;
    RandomStream rng(seed);
    std::mt19937_64 coin(8);
    std::vector<double> prices;
    for (int n = 0; n < 5000; ++n) {
      prices.push_back(s.propose(rational(), rng).price);
      s.apply_decision(coin() % 2);
    }
    return prices;
  };
  EXPECT_EQ(play(42), play(42));
  EXPECT_NE(play(42), play(43));
}
