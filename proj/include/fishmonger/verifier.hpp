#pragma once

// Numerical checks of the mechanism's guarantees: branch simplex, reward
// curve growth (Spence-Mirrlees), the naive-play key inequality, distortion
// at the top, the revenue-share bound and long-run threshold optimality.

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "fishmonger/curves.hpp"
#include "fishmonger/engine.hpp"

namespace fishmonger {

struct CheckReport {
  std::string name;
  std::string grid;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  bool skipped = false;
  std::string notice;
  // Concrete inputs and values of the worst violation; always set on failure.
  nlohmann::json witness = nlohmann::json::object();
  // Check-specific extra findings.
  nlohmann::json details = nlohmann::json::object();
};

std::vector<double> linear_grid(double lo, double hi, double step);
std::vector<double> log_grid(double lo, double hi, std::size_t points);

// Every branch probability >= -1e-12 and the three sum to 1 within 1e-12.
CheckReport check_simplex(const RewardCurve& rc, const std::vector<double>& q_grid);

// Central difference of R against p: |dR - p| <= 1e-6 (1 + p), h = 1e-4.
CheckReport check_derivative(const RewardCurve& rc, const std::vector<double>& q_grid);

// R(q + x) >= R(q) + x p(q) - 1e-9 for all grid pairs.
CheckReport check_spence_mirrlees(const RewardCurve& rc, const std::vector<double>& q_grid,
                                  const std::vector<double>& x_grid);

// (q - q_n) p(q_n) + R(q_n) <= R(q) + 1e-9 everywhere. details records
// whether equality only happens on the diagonal q == q_n.
CheckReport check_key_inequality(const RewardCurve& rc, const std::vector<double>& q_grid,
                                 const std::vector<double>& qn_grid);

struct DistortionRow {
  double q = 0.0;
  double fisher_rate = 0.0;
  double cook_rate = 0.0;
  double ratio = 0.0;
};

struct DistortionResult {
  std::vector<DistortionRow> rows;
  CheckReport report;
};

// fisher = q p(q) - R(q), cook = R(q). Asserts the ratio strictly decreases
// along the list (when it has more than one point) and ends below
// `threshold`. Skipped for curves that do not tend to 1.
DistortionResult distortion_curve(const RewardCurve& rc, const std::vector<double>& q_list,
                                  double threshold = 0.1);

struct ShareSample {
  double q = 0.0;
  double fisher_liminf = 0.0;  // tail-min of the revenue prefix average
  double fisher_avg = 0.0;
};

// Cook of type q playing naive(q_prime): fisher liminf proxy must stay below
// q (eps + 1 - p(q_prime)) and match q' p(q') - R(q') within `band`.
CheckReport check_share_bound(const RewardCurve& rc, double q_prime, double epsilon,
                               const std::vector<ShareSample>& samples, double band = 0.02);

// Runs the engine for each q in q_list with policy naive(q_prime); the
// samples are replication means.
std::vector<ShareSample> simulate_share_samples(const GameConfig& base, double q_prime,
                                                const std::vector<double>& q_list,
                                                std::size_t replications);

struct SweepRow {
  double threshold = 0.0;
  double payoff_mean = 0.0;
  double payoff_stderr = 0.0;
  double closed_form = 0.0;
};

struct SweepResult {
  double argmax = 0.0;
  std::vector<SweepRow> rows;
  CheckReport report;
};

/// Monte Carlo payoff of naive(x) for each x, all sharing base.seed.
/// Asserts |argmax - q| <= largest grid step and every row within `band` of
/// (q - x) p(x) + R(x).
SweepResult threshold_sweep(const GameConfig& base, const std::vector<double>& x_grid,
                            std::size_t replications, double band = 0.02);

nlohmann::json to_json(const CheckReport& report);
std::string summary_line(const CheckReport& report);

}  // namespace fishmonger
