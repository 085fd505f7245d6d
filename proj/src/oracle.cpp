#include "fishmonger/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fishmonger/errors.hpp"
#include "fishmonger/mechanism.hpp"

namespace fishmonger {

namespace {

enum class CookMode { kOptimal, kNaive };

class Search {
 public:
  Search(const OracleConfig& config, CookMode mode)
      : rc_(config.curve), config_(config), mode_(mode) {}

  double value(const MechanismState& state) {
    if (state.round() >= config_.horizon) return 0.0;
    const std::string key = canonical_key(state);
    if (auto it = memo_.find(key); it != memo_.end()) {
      ++memo_hits_;
      return it->second;
    }
    ++nodes_;

    const double qn = state.estimate();
    const BranchDistribution d = branch_distribution(rc_, qn);
    const double grid = static_cast<double>(config_.grid);
    double total = 0.0;
    if (d.adaptation > 0.0) {
      const double atom_prob = d.adaptation / grid;
      for (std::size_t j = 1; j <= config_.grid; ++j) {
        const double price = qn + (static_cast<double>(j) - 0.5) / grid;
        total += atom_prob * decision_value(state, Branch::kAdaptation, price);
      }
    }
    if (d.reward > 0.0) total += d.reward * decision_value(state, Branch::kReward, 0.0);
    if (d.confirmation > 0.0) {
      total += d.confirmation * decision_value(state, Branch::kConfirmation, qn);
    }
    memo_.emplace(key, total);
    return total;
  }

  std::size_t nodes() const { return nodes_; }
  std::size_t memo_hits() const { return memo_hits_; }

 private:
  double decision_value(const MechanismState& state, Branch branch, double price) {
    const double q = config_.cook_type;
    auto branch_value = [&](bool accept) {
      MechanismState next = state;
      next.issue(branch, price);
      next.apply_decision(accept);
      return (accept ? q - price : 0.0) + value(next);
    };
    if (mode_ == CookMode::kNaive) return branch_value(price <= q);
    return std::max(branch_value(true), branch_value(false));
  }

  // The mechanism's future depends on the estimate, the round count, the
  // acceptance count and the multiset of past prices.
  static std::string canonical_key(const MechanismState& state) {
    std::vector<double> prices;
    prices.reserve(state.offers().size());
    for (const OfferRecord& rec : state.offers()) prices.push_back(rec.offer.price);
    std::sort(prices.begin(), prices.end());
    std::string key;
    key.reserve(8 * (prices.size() + 3));
    auto put = [&key](std::uint64_t v) {
      key.append(reinterpret_cast<const char*>(&v), sizeof v);
    };
    put(state.round());
    put(state.accepted_count());
    put(std::bit_cast<std::uint64_t>(state.estimate()));
    for (double p : prices) put(std::bit_cast<std::uint64_t>(p));
    return key;
  }

  RewardCurve rc_;
  const OracleConfig& config_;
  CookMode mode_;
  std::unordered_map<std::string, double> memo_;
  std::size_t nodes_ = 0;
  std::size_t memo_hits_ = 0;
};

}  // namespace

double oracle_tree_size(std::size_t horizon, std::size_t grid) {
  return std::pow(2.0 * (static_cast<double>(grid) + 2.0), static_cast<double>(horizon));
}

OracleResult expectimax_oracle(const OracleConfig& config) {
  if (config.horizon < 1) throw ConfigError("oracle.horizon must be >= 1");
  if (config.grid < 1) throw ConfigError("oracle.grid must be >= 1");
  if (!(config.cook_type >= 0.0)) throw ConfigError("cook type must be >= 0");
  OracleResult out;
  out.tree_size = oracle_tree_size(config.horizon, config.grid);
  if (out.tree_size > config.node_budget) {
    std::ostringstream os;
    os << "oracle tree of size (2(G+2))^H = " << out.tree_size << " exceeds the budget of "
       << config.node_budget << " (H=" << config.horizon << ", G=" << config.grid << ")";
    throw ConfigError(os.str());
  }

  Search optimal(config, CookMode::kOptimal);
  out.optimal = optimal.value(MechanismState{});
  Search naive_search(config, CookMode::kNaive);
  out.naive = naive_search.value(MechanismState{});
  out.gap = out.optimal - out.naive;
  out.nodes_expanded = optimal.nodes() + naive_search.nodes();
  out.memo_hits = optimal.memo_hits() + naive_search.memo_hits();
  return out;
}

}  // namespace fishmonger
