#include "fishmonger/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "fishmonger/errors.hpp"
#include "fishmonger/rng.hpp"

namespace fishmonger {

namespace {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::size_t branch_index(Branch b) { return static_cast<std::size_t>(b); }

}  // namespace

void validate(const GameConfig& config) {
  if (config.rounds < 1) throw ConfigError("engine.rounds must be >= 1");
  if (config.burn_in >= config.rounds) {
    throw ConfigError("engine.burn_in (" + std::to_string(config.burn_in) +
                      ") must be < engine.rounds (" + std::to_string(config.rounds) + ")");
  }
  if (!(config.cook_type >= 0.0) || !std::isfinite(config.cook_type)) {
    throw ConfigError("cook.type must be a finite value >= 0");
  }
  if (config.stride < 1) throw ConfigError("engine.stride must be >= 1");
}

LiminfEstimate estimate_liminf(std::span<const double> series, std::size_t burn_in) {
  if (burn_in >= series.size()) {
    throw ConfigError("liminf burn-in index " + std::to_string(burn_in) +
                      " is past the end of a series of length " +
                      std::to_string(series.size()));
  }
  const auto tail = series.subspan(burn_in);
  return {*std::min_element(tail.begin(), tail.end()), series.back()};
}

RunResult run(const GameConfig& config) {
  validate(config);
  const RewardCurve rc(config.curve, config.quadrature_tolerance);
  const double q = config.cook_type;
  RandomStream rng(config.seed);
  CookPolicy policy = config.policy;
  MechanismState state;

  RunResult result;
  RunStatistics& st = result.stats;
  st.cook_type = q;
  st.rounds = config.rounds;
  st.burn_in = config.burn_in;
  if (config.record_history) result.history.reserve(config.rounds);
  st.series.reserve(config.rounds / config.stride + 1);

  CompensatedSum revenue;
  CompensatedSum surplus;
  std::size_t accepts = 0;

  for (std::size_t n = 0; n < config.rounds; ++n) {
    const double estimate_before = state.estimate();
    const PriceOffer offer = state.propose(rc, rng);
    bool accept = false;
    try {
      accept = decide(policy, offer.price, n);
    } catch (const PolicyError& e) {
      throw PolicyError("round " + std::to_string(n) + ": " + e.what());
    }
    state.apply_decision(accept);

    ++st.branch_counts[branch_index(offer.branch)];
    if (accept) {
      ++accepts;
      revenue.add(offer.price);
      surplus.add(q - offer.price);
    }
    if (config.record_history) {
      result.history.push_back({n, offer.price, accept, estimate_before, offer.branch});
    }

    const std::size_t played = n + 1;
    if (played % config.stride == 0 || played == config.rounds) {
      const double k = static_cast<double>(played);
      const double rev = revenue.value();
      const double sur = surplus.value();
      st.series.push_back({played, rev / k, sur / k, static_cast<double>(accepts) / k});
      const double welfare = q * static_cast<double>(accepts);
      const double scale = std::max({std::abs(rev) + std::abs(sur), welfare, 1e-300});
      st.welfare_residual = std::max(st.welfare_residual, std::abs(rev + sur - welfare) / scale);
    }
  }

  const double total = static_cast<double>(config.rounds);
  st.revenue_total = revenue.value();
  st.surplus_total = surplus.value();
  st.accepts = accepts;
  st.revenue_avg = st.revenue_total / total;
  st.surplus_avg = st.surplus_total / total;
  st.accept_freq = static_cast<double>(accepts) / total;
  for (std::size_t b = 0; b < 3; ++b) {
    st.branch_freq[b] = static_cast<double>(st.branch_counts[b]) / total;
  }
  st.final_estimate = state.estimate();

  std::size_t first_tail = 0;
  while (first_tail < st.series.size() && st.series[first_tail].round <= config.burn_in) {
    ++first_tail;
  }
  std::vector<double> rev_series, sur_series, acc_series;
  rev_series.reserve(st.series.size());
  sur_series.reserve(st.series.size());
  acc_series.reserve(st.series.size());
  for (const PrefixPoint& pt : st.series) {
    rev_series.push_back(pt.revenue_avg);
    sur_series.push_back(pt.surplus_avg);
    acc_series.push_back(pt.accept_freq);
  }
  st.revenue_liminf = estimate_liminf(rev_series, first_tail);
  st.surplus_liminf = estimate_liminf(sur_series, first_tail);
  st.accept_liminf = estimate_liminf(acc_series, first_tail);
  return result;
}

StatSummary summarize(std::span<const double> values) {
  StatSummary s;
  if (values.empty()) return s;
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  const double n = static_cast<double>(values.size());
  s.mean = sum.value() / n;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  if (values.size() > 1) {
    CompensatedSum sq;
    for (double v : values) sq.add((v - s.mean) * (v - s.mean));
    s.stderr_ = std::sqrt(sq.value() / (n - 1.0) / n);
  }
  return s;
}

MonteCarloSummary monte_carlo(const GameConfig& config, std::size_t replications,
                              unsigned threads) {
  if (replications < 1) throw ConfigError("replications must be >= 1");
  validate(config);

  MonteCarloSummary out;
  out.replications = replications;
  out.seeds.resize(replications);
  for (std::size_t r = 0; r < replications; ++r) out.seeds[r] = derive_seed(config.seed, r);
  out.runs.resize(replications);

  auto run_one = [&](std::size_t r) {
    GameConfig cfg = config;
    cfg.seed = out.seeds[r];
    cfg.record_history = false;
    RunStatistics st = run(cfg).stats;
    st.series.clear();
    st.series.shrink_to_fit();
    out.runs[r] = std::move(st);
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  // External channels are not assumed to be thread-safe.
  if (std::holds_alternative<ExternalPolicy>(config.policy)) threads = 1;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, replications));

  if (threads <= 1) {
    for (std::size_t r = 0; r < replications; ++r) run_one(r);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t r = t; r < replications; r += threads) run_one(r);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  auto collect = [&](auto field) {
    std::vector<double> v;
    v.reserve(replications);
    for (const RunStatistics& st : out.runs) v.push_back(field(st));
    return summarize(v);
  };
  out.revenue_avg = collect([](const RunStatistics& s) { return s.revenue_avg; });
  out.surplus_avg = collect([](const RunStatistics& s) { return s.surplus_avg; });
  out.accept_freq = collect([](const RunStatistics& s) { return s.accept_freq; });
  out.revenue_liminf = collect([](const RunStatistics& s) { return s.revenue_liminf.tail_min; });
  out.surplus_liminf = collect([](const RunStatistics& s) { return s.surplus_liminf.tail_min; });
  out.accept_liminf = collect([](const RunStatistics& s) { return s.accept_liminf.tail_min; });
  return out;
}

}  // namespace fishmonger
