#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fishmonger/errors.hpp"
#include "fishmonger/oracle.hpp"
#include "oracles.hpp"

using namespace fishmonger;

namespace {

// Plain recursive expectimax over the full tree, no memoization, with the
// rational curve and demotion written out independently.
struct BruteForce {
  double q;
  std::size_t grid;

  struct State {
    double estimate = 0.0;
    std::vector<double> prices;
    std::vector<int> decisions;
  };

  double value(const State& s, std::size_t left, bool naive) const {
    if (left == 0) return 0.0;
    const double qn = s.estimate;
    const double p = qn / (1.0 + qn);
    const double r_over_q = qn > 0 ? (qn - std::log1p(qn)) / qn : 0.0;
    double total = 0.0;
    for (std::size_t j = 1; j <= grid; ++j) {
      const double price = qn + (static_cast<double>(j) - 0.5) / static_cast<double>(grid);
      total += (1.0 - p) / static_cast<double>(grid) * respond(s, price, 0, left, naive);
    }
    if (r_over_q > 0) total += r_over_q * respond(s, 0.0, 1, left, naive);
    if (p - r_over_q > 0) total += (p - r_over_q) * respond(s, qn, 2, left, naive);
    return total;
  }

  // kind: 0 adaptation, 1 reward, 2 confirmation.
  double respond(const State& s, double price, int kind, std::size_t left, bool naive) const {
    auto after = [&](bool accept) {
      State next = s;
      next.prices.push_back(price);
      next.decisions.push_back(accept);
      if (kind == 0 && accept) next.estimate = price;
      if (kind == 2 && !accept) next.estimate = oracle::demote(next.prices, next.decisions, s.estimate);
      return (accept ? q - price : 0.0) + value(next, left - 1, naive);
    };
    if (naive) return after(price <= q);
    return std::max(after(true), after(false));
  }
};

OracleConfig rational_config(std::size_t h, std::size_t g, double q = 1.0) {
  OracleConfig c;
  c.horizon = h;
  c.grid = g;
  c.cook_type = q;
  return c;
}

}  // namespace

TEST(Oracle, SingleRoundMatchesHandFormula) {
  for (std::size_t g : {1u, 2u, 3u, 7u}) {
    for (double q : {0.0, 0.3, 1.0, 2.5}) {
      double hand = 0.0;
      for (std::size_t j = 1; j <= g; ++j) {
        hand += (1.0 / g) * std::max(0.0, q - (0.0 + (j - 0.5) / g));
      }
      OracleResult r = expectimax_oracle(rational_config(1, g, q));
      EXPECT_EQ(r.optimal, hand) << g << " " << q;
      EXPECT_EQ(r.naive, hand);
      EXPECT_EQ(r.gap, 0.0);
    }
  }
}

TEST(Oracle, OptimalNeverBelowNaive) {
  for (std::size_t h = 1; h <= 5; ++h) {
    for (std::size_t g : {1u, 2u, 3u}) {
      for (double q : {0.2, 1.0, 1.7}) {
        OracleConfig c = rational_config(h, g, q);
        if (oracle_tree_size(h, g) > 1e6) continue;
        OracleResult r = expectimax_oracle(c);
        EXPECT_GE(r.optimal, r.naive);
        EXPECT_GE(r.gap, 0.0);
      }
    }
  }
  OracleConfig e = rational_config(4, 2, 1.0);
  e.curve = AcceptanceCurve::exponential(0.8);
  OracleResult r = expectimax_oracle(e);
  EXPECT_GE(r.optimal, r.naive);
}

TEST(Oracle, AgreesWithIndependentBruteForce) {
  for (std::size_t h = 1; h <= 4; ++h) {
    for (std::size_t g : {1u, 2u, 3u}) {
      for (double q : {0.6, 1.0, 1.9}) {
        OracleResult r = expectimax_oracle(rational_config(h, g, q));
        BruteForce bf{q, g};
        EXPECT_NEAR(r.optimal, bf.value({}, h, false), 1e-12) << h << " " << g << " " << q;
        EXPECT_NEAR(r.naive, bf.value({}, h, true), 1e-12) << h << " " << g << " " << q;
      }
    }
  }
}

TEST(Oracle, PinnedFixtureHorizonFourGridTwo) {
  // Regression fixture, rational curve, q = 1.
  OracleResult a = expectimax_oracle(rational_config(4, 2));
  OracleResult b = expectimax_oracle(rational_config(4, 2));
  EXPECT_EQ(a.optimal, 0x1.8145aba39d4eep+0);
  EXPECT_EQ(a.naive, 0x1.778f91cd8f099p+0);
  EXPECT_EQ(a.gap, 0x1.36c33ac1c8aa0p-5);
  EXPECT_EQ(a.optimal, b.optimal);
  EXPECT_EQ(a.naive, b.naive);
  EXPECT_EQ(a.gap, b.gap);
  EXPECT_EQ(a.tree_size, 4096.0);
}

TEST(Oracle, PerRoundGapGrowsOverShortHorizons) {
  // On this instance the second round is still myopic (gap 0 at H = 2), so
  // the per-round gap rises through H = 4 rather than falling.
  const double g2 = expectimax_oracle(rational_config(2, 2)).gap / 2.0;
  const double g3 = expectimax_oracle(rational_config(3, 2)).gap / 3.0;
  const double g4 = expectimax_oracle(rational_config(4, 2)).gap / 4.0;
  EXPECT_EQ(g2, 0.0);
  EXPECT_GT(g3, g2);
  EXPECT_GT(g4, g3);
}

TEST(Oracle, RefusesOverBudgetTrees) {
  OracleConfig c = rational_config(9, 2);
  c.node_budget = 5e7;
  try {
    expectimax_oracle(c);
    FAIL() << "expected budget refusal";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("1.34"), std::string::npos) << e.what();
  }
  EXPECT_EQ(oracle_tree_size(9, 2), std::pow(8.0, 9));
  EXPECT_THROW(expectimax_oracle(rational_config(0, 2)), ConfigError);
  EXPECT_THROW(expectimax_oracle(rational_config(2, 0)), ConfigError);
}
