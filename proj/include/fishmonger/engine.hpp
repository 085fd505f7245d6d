#pragma once

// Repeated-game runner: N rounds of propose -> decide -> apply_decision,
// with running revenue/surplus statistics and Monte Carlo replication.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fishmonger/cook.hpp"
#include "fishmonger/curves.hpp"
#include "fishmonger/mechanism.hpp"

namespace fishmonger {

struct GameConfig {
  AcceptanceCurve curve = AcceptanceCurve::rational();
  double cook_type = 1.0;
  CookPolicy policy = NaivePolicy{1.0};
  std::size_t rounds = 100000;
  std::uint64_t seed = 1;
  std::size_t burn_in = 10000;
  std::size_t stride = 100;
  bool record_history = true;
  double quadrature_tolerance = RewardCurve::kDefaultTolerance;
};

// Throws ConfigError on N < 1, burn-in >= N, q < 0 or stride < 1.
void validate(const GameConfig& config);

struct RoundRecord {
  std::size_t round = 0;  // 0-based
  double price = 0.0;
  bool accepted = false;
  double estimate_before = 0.0;
  Branch branch = Branch::kAdaptation;

  double revenue() const { return accepted ? price : 0.0; }
  double surplus(double cook_type) const { return accepted ? cook_type - price : 0.0; }
};

using GameHistory = std::vector<RoundRecord>;

// Prefix averages after `round` rounds (1-based count).
struct PrefixPoint {
  std::size_t round = 0;
  double revenue_avg = 0.0;
  double surplus_avg = 0.0;
  double accept_freq = 0.0;
};

struct LiminfEstimate {
  double tail_min = 0.0;
  double final_value = 0.0;
};

// Minimum of series[burn_in..] and the last element. Throws ConfigError when
// burn_in >= series.size().
LiminfEstimate estimate_liminf(std::span<const double> series, std::size_t burn_in);

struct RunStatistics {
  double cook_type = 0.0;
  std::size_t rounds = 0;
  std::size_t burn_in = 0;
  double revenue_total = 0.0;
  double surplus_total = 0.0;
  std::size_t accepts = 0;
  double revenue_avg = 0.0;
  double surplus_avg = 0.0;
  double accept_freq = 0.0;
  LiminfEstimate revenue_liminf;
  LiminfEstimate surplus_liminf;
  LiminfEstimate accept_liminf;
  std::array<std::size_t, 3> branch_counts{};  // indexed by Branch
  std::array<double, 3> branch_freq{};
  double final_estimate = 0.0;
  // Largest |revenue + surplus - q * accepts| / scale over logged prefixes.
  double welfare_residual = 0.0;
  std::vector<PrefixPoint> series;
};

struct RunResult {
  GameHistory history;
  RunStatistics stats;
};

RunResult run(const GameConfig& config);

struct StatSummary {
  double mean = 0.0;
  std::optional<double> stderr_;  // absent for a single replication
  double min = 0.0;
  double max = 0.0;
};

StatSummary summarize(std::span<const double> values);

struct MonteCarloSummary {
  std::size_t replications = 0;
  std::vector<std::uint64_t> seeds;
  StatSummary revenue_avg;
  StatSummary surplus_avg;
  StatSummary accept_freq;
  StatSummary revenue_liminf;
  StatSummary surplus_liminf;
  StatSummary accept_liminf;
  std::vector<RunStatistics> runs;  // series stripped
};

/// Replication r runs with seed derive_seed(config.seed, r). threads == 0
/// picks the hardware concurrency; results do not depend on it.
MonteCarloSummary monte_carlo(const GameConfig& config, std::size_t replications,
                              unsigned threads = 0);

}  // namespace fishmonger
