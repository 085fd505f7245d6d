#include "fishmonger/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fishmonger/errors.hpp"

namespace fishmonger {

namespace {

constexpr double kClosedFormTolerance = 1e-9;

std::string describe_grid(const std::vector<double>& g) {
  if (g.empty()) return "[]";
  std::ostringstream os;
  os.precision(6);
  os << g.size() << " points in [" << g.front() << ", " << g.back() << "]";
  return os.str();
}

// Tracks the worst violation and its witness.
struct WorstTracker {
  double worst = 0.0;
  nlohmann::json witness = nlohmann::json::object();

  void offer(double violation, nlohmann::json w) {
    if (violation > worst) {
      worst = violation;
      witness = std::move(w);
    }
  }
};

void finish(CheckReport& r, const WorstTracker& t) {
  r.worst_violation = t.worst;
  r.passed = t.worst <= r.tolerance;
  r.witness = t.witness;
}

}  // namespace

std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw ConfigError("invalid linear grid");
  const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step));
  std::vector<double> g;
  g.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || hi < lo || points < 2) throw ConfigError("invalid log grid");
  std::vector<double> g;
  g.reserve(points);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i) {
    g.push_back(std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1)));
  }
  g.back() = hi;
  return g;
}

CheckReport check_simplex(const RewardCurve& rc, const std::vector<double>& q_grid) {
  CheckReport r{.name = "simplex", .grid = describe_grid(q_grid), .tolerance = 1e-12};
  WorstTracker t;
  for (double q : q_grid) {
    const BranchDistribution d = raw_branch_distribution(rc, q);
    const double neg = std::max({0.0, -d.adaptation, -d.reward, -d.confirmation});
    const double sum_err = std::abs(d.adaptation + d.reward + d.confirmation - 1.0);
    t.offer(std::max(neg, sum_err), {{"q", q},
                                     {"adaptation", d.adaptation},
                                     {"reward", d.reward},
                                     {"confirmation", d.confirmation}});
  }
  finish(r, t);
  return r;
}

CheckReport check_derivative(const RewardCurve& rc, const std::vector<double>& q_grid) {
  constexpr double h = 1e-4;
  CheckReport r{.name = "derivative", .grid = describe_grid(q_grid), .tolerance = 0.0};
  // Tolerance scales with p; report the violation in units of 1e-6 (1 + p).
  r.tolerance = 1.0;
  WorstTracker t;
  for (double q : q_grid) {
    if (q < h) continue;
    const double p = rc.p(q);
    const double diff = (rc.R(q + h) - rc.R(q - h)) / (2 * h);
    const double scaled = std::abs(diff - p) / (1e-6 * (1.0 + p));
    t.offer(scaled, {{"q", q}, {"p", p}, {"central_difference", diff}});
  }
  finish(r, t);
  r.notice = "violation in units of 1e-6 (1 + p(q))";
  return r;
}

CheckReport check_spence_mirrlees(const RewardCurve& rc, const std::vector<double>& q_grid,
                                  const std::vector<double>& x_grid) {
  CheckReport r{.name = "spence_mirrlees",
                .grid = "q: " + describe_grid(q_grid) + "; x: " + describe_grid(x_grid),
                .tolerance = kClosedFormTolerance};
  WorstTracker t;
  double min_margin = std::numeric_limits<double>::infinity();
  for (double q : q_grid) {
    const double rq = rc.R(q);
    const double pq = rc.p(q);
    for (double x : x_grid) {
      const double lhs = rc.R(q + x);
      const double rhs = rq + x * pq;
      min_margin = std::min(min_margin, lhs - rhs);
      t.offer(rhs - lhs, {{"q", q}, {"x", x}, {"R(q+x)", lhs}, {"R(q)+x*p(q)", rhs}});
    }
  }
  finish(r, t);
  r.details["min_margin"] = min_margin;
  return r;
}

CheckReport check_key_inequality(const RewardCurve& rc, const std::vector<double>& q_grid,
                                 const std::vector<double>& qn_grid) {
  CheckReport r{.name = "key_inequality",
                .grid = "q: " + describe_grid(q_grid) + "; q_n: " + describe_grid(qn_grid),
                .tolerance = kClosedFormTolerance};
  WorstTracker t;
  double min_off_diagonal_gap = std::numeric_limits<double>::infinity();
  nlohmann::json tightest = nlohmann::json::object();
  for (double q : q_grid) {
    const double rq = rc.R(q);
    for (double qn : qn_grid) {
      const double lhs = naive_payoff(rc, q, qn);
      t.offer(lhs - rq, {{"q", q}, {"q_n", qn}, {"naive_payoff", lhs}, {"R(q)", rq}});
      if (q != qn && rq - lhs < min_off_diagonal_gap) {
        min_off_diagonal_gap = rq - lhs;
        tightest = {{"q", q}, {"q_n", qn}, {"gap", rq - lhs}};
      }
    }
  }
  finish(r, t);
  r.details["min_off_diagonal_gap"] = min_off_diagonal_gap;
  r.details["tightest_off_diagonal"] = tightest;
  r.details["equality_only_on_diagonal"] = min_off_diagonal_gap > 1e-12;
  return r;
}

DistortionResult distortion_curve(const RewardCurve& rc, const std::vector<double>& q_list,
                                  double threshold) {
  DistortionResult out;
  CheckReport& r = out.report;
  r.name = "distortion_at_the_top";
  r.grid = describe_grid(q_list);
  r.tolerance = 0.0;
  if (!rc.curve().reaches_one()) {
    r.skipped = true;
    r.notice = "curve does not tend to 1; distortion check skipped";
    return out;
  }
  for (std::size_t i = 0; i < q_list.size(); ++i) {
    const double q = q_list[i];
    if (!(q > 0.0) || (i > 0 && !(q > q_list[i - 1]))) {
      throw ConfigError("distortion q-list must be positive and increasing");
    }
    const double cook = rc.R(q);
    const double fisher = q * rc.p(q) - cook;
    out.rows.push_back({q, fisher, cook, fisher / cook});
  }
  WorstTracker t;
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const double rise = out.rows[i].ratio - out.rows[i - 1].ratio;
    // A tie also violates strict decrease.
    if (rise >= 0.0) {
      t.offer(std::max(rise, std::numeric_limits<double>::min()),
              {{"q_prev", out.rows[i - 1].q},
               {"ratio_prev", out.rows[i - 1].ratio},
               {"q", out.rows[i].q},
               {"ratio", out.rows[i].ratio}});
    }
  }
  if (!out.rows.empty() && out.rows.size() > 1 && out.rows.back().ratio >= threshold) {
    t.offer(out.rows.back().ratio - threshold + std::numeric_limits<double>::min(),
            {{"q", out.rows.back().q}, {"ratio", out.rows.back().ratio}, {"threshold", threshold}});
  }
  finish(r, t);
  r.details["threshold"] = threshold;
  return out;
}

CheckReport check_share_bound(const RewardCurve& rc, double q_prime, double epsilon,
                               const std::vector<ShareSample>& samples, double band) {
  CheckReport r;
  r.name = "share_bound";
  r.tolerance = 0.0;
  std::ostringstream grid;
  grid << "q' = " << q_prime << ", eps = " << epsilon << ", " << samples.size() << " cook types";
  r.grid = grid.str();
  const double p_prime = rc.p(q_prime);
  const double stationary = q_prime * p_prime - rc.R(q_prime);
  WorstTracker t;
  nlohmann::json rows = nlohmann::json::array();
  for (const ShareSample& s : samples) {
    const double bound = s.q * (epsilon + 1.0 - p_prime);
    const double over_bound = s.fisher_liminf - bound;
    const double off_stationary = std::abs(s.fisher_liminf - stationary) - band;
    nlohmann::json w = {{"q", s.q},
                        {"fisher_liminf", s.fisher_liminf},
                        {"fisher_avg", s.fisher_avg},
                        {"bound", bound},
                        {"stationary", stationary}};
    rows.push_back(w);
    t.offer(std::max(over_bound, off_stationary), w);
  }
  finish(r, t);
  r.details["stationary_fisher_rate"] = stationary;
  r.details["band"] = band;
  r.details["samples"] = rows;
  return r;
}

std::vector<ShareSample> simulate_share_samples(const GameConfig& base, double q_prime,
                                                const std::vector<double>& q_list,
                                                std::size_t replications) {
  std::vector<ShareSample> out;
  for (double q : q_list) {
    GameConfig cfg = base;
    cfg.cook_type = q;
    cfg.policy = naive(q_prime);
    const MonteCarloSummary mc = monte_carlo(cfg, replications);
    out.push_back({q, mc.revenue_liminf.mean, mc.revenue_avg.mean});
  }
  return out;
}

SweepResult threshold_sweep(const GameConfig& base, const std::vector<double>& x_grid,
                            std::size_t replications, double band) {
  if (x_grid.empty()) throw ConfigError("threshold sweep needs a nonempty x-grid");
  SweepResult out;
  const RewardCurve rc(base.curve, base.quadrature_tolerance);
  const double q = base.cook_type;

  std::size_t best = 0;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    GameConfig cfg = base;
    cfg.policy = naive(x_grid[i]);
    const MonteCarloSummary mc = monte_carlo(cfg, replications);
    out.rows.push_back({x_grid[i], mc.surplus_avg.mean, mc.surplus_avg.stderr_.value_or(0.0),
                        naive_payoff(rc, q, x_grid[i])});
    if (out.rows[i].payoff_mean > out.rows[best].payoff_mean) best = i;
  }
  out.argmax = x_grid[best];

  double step = 0.0;
  for (std::size_t i = 1; i < x_grid.size(); ++i) step = std::max(step, x_grid[i] - x_grid[i - 1]);

  CheckReport& r = out.report;
  r.name = "threshold_sweep";
  r.grid = "x: " + describe_grid(x_grid) + "; q = " + std::to_string(q);
  r.tolerance = 0.0;
  WorstTracker t;
  const double argmax_excess = std::abs(out.argmax - q) - step;
  t.offer(argmax_excess, {{"argmax", out.argmax}, {"q", q}, {"grid_step", step}});
  for (const SweepRow& row : out.rows) {
    t.offer(std::abs(row.payoff_mean - row.closed_form) - band,
            {{"x", row.threshold}, {"payoff", row.payoff_mean}, {"closed_form", row.closed_form}});
  }
  finish(r, t);
  r.details["argmax"] = out.argmax;
  r.details["band"] = band;
  return out;
}

nlohmann::json to_json(const CheckReport& report) {
  return {{"name", report.name},         {"grid", report.grid},
          {"worst_violation", report.worst_violation},
          {"tolerance", report.tolerance}, {"passed", report.passed},
          {"skipped", report.skipped},   {"notice", report.notice},
          {"witness", report.witness},   {"details", report.details}};
}

std::string summary_line(const CheckReport& report) {
  std::ostringstream os;
  os.precision(6);
  if (report.skipped) {
    os << "SKIP " << report.name << ": " << report.notice;
    return os.str();
  }
  os << (report.passed ? "PASS " : "FAIL ") << report.name << "  worst=" << report.worst_violation
     << " tol=" << report.tolerance << "  [" << report.grid << "]";
  if (!report.passed) os << "  witness=" << report.witness.dump();
  return os.str();
}

}  // namespace fishmonger
