#include "fishmonger/mechanism.hpp"

#include <algorithm>
#include <functional>
#include <string>

#include "fishmonger/errors.hpp"

namespace fishmonger {

std::string_view to_string(Branch branch) {
  switch (branch) {
    case Branch::kAdaptation:
      return "adaptation";
    case Branch::kReward:
      return "reward";
    case Branch::kConfirmation:
      return "confirmation";
  }
  return "unknown";
}

Branch parse_branch(std::string_view name) {
  if (name == "adaptation") return Branch::kAdaptation;
  if (name == "reward") return Branch::kReward;
  if (name == "confirmation") return Branch::kConfirmation;
  throw ConfigError("unknown branch '" + std::string(name) + "'");
}

const PriceOffer& MechanismState::pending_offer() const {
  if (!has_pending()) throw ProtocolError("no offer is pending");
  return offers_.back().offer;
}

const PriceOffer& MechanismState::propose(const RewardCurve& rc, RandomStream& rng) {
  if (has_pending()) throw ProtocolError("propose: an offer is already pending a decision");
  const BranchDistribution d = branch_distribution(rc, estimate_);
  const double u = rng.uniform();
  if (u < d.adaptation) return issue(Branch::kAdaptation, estimate_ + rng.uniform());
  if (u < d.adaptation + d.reward) return issue(Branch::kReward, 0.0);
  return issue(Branch::kConfirmation, estimate_);
}

const PriceOffer& MechanismState::issue(Branch branch, double price) {
  if (has_pending()) throw ProtocolError("issue: an offer is already pending a decision");
  switch (branch) {
    case Branch::kReward:
      if (price != 0.0) throw ProtocolError("reward offers must have price 0");
      break;
    case Branch::kConfirmation:
      if (price != estimate_) throw ProtocolError("confirmation offers must be priced at q_n");
      break;
    case Branch::kAdaptation:
      if (!(price >= estimate_ && price <= estimate_ + 1.0)) {
        throw ProtocolError("adaptation offers must lie in [q_n, q_n + 1]");
      }
      break;
  }
  offers_.push_back(OfferRecord{PriceOffer{completed_, price, branch}, estimate_, std::nullopt});
  prices_.push_back(price);
  return offers_.back().offer;
}

double MechanismState::apply_decision(bool accept) {
  if (!has_pending()) throw ProtocolError("apply_decision: no offer is pending");
  OfferRecord& rec = offers_.back();
  rec.accepted = accept;
  if (accept) ++accepted_;
  ++completed_;

  switch (rec.offer.branch) {
    case Branch::kAdaptation:
      if (accept) estimate_ = rec.offer.price;
      break;
    case Branch::kReward:
      break;
    case Branch::kConfirmation:
      if (!accept) estimate_ = demote_prices(prices_, accepted_, estimate_);
      break;
  }
  return estimate_;
}

double demote_prices(std::vector<double> prices, std::size_t accepted, double estimate) {
  const std::size_t n = prices.size();
  if (n == 0) throw ProtocolError("demote: empty history");
  if (accepted >= n) throw ProtocolError("demote: history contains no refused price");

  // 1-based descending rank j = n - k, and j - 1 padded to 1.
  const std::size_t j = n - accepted;
  auto nth = prices.begin() + static_cast<std::ptrdiff_t>(j - 1);
  std::nth_element(prices.begin(), nth, prices.end(), std::greater<>());
  const double lower = *nth;
  const double upper = j >= 2 ? *std::min_element(prices.begin(), nth) : lower;
  const double candidate = 0.5 * (lower + upper);

  if (candidate < estimate) return candidate;
  return estimate * static_cast<double>(n) / static_cast<double>(n + 1);
}

double demote(std::span<const PricedDecision> history, double estimate) {
  std::vector<double> prices;
  prices.reserve(history.size());
  std::size_t accepted = 0;
  for (const PricedDecision& d : history) {
    prices.push_back(d.price);
    if (d.accepted) ++accepted;
  }
  return demote_prices(std::move(prices), accepted, estimate);
}

}  // namespace fishmonger
