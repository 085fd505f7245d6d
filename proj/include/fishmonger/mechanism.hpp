#pragma once

// The committed fisher strategy. Each round draws one of three price types
// from branch_distribution(q_n):
//   adaptation    price uniform on [q_n, q_n + 1]; acceptance moves q_n up
//   reward        price 0
//   confirmation  price q_n; refusal demotes q_n
// The estimate starts at q_0 = 0.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fishmonger/curves.hpp"
#include "fishmonger/rng.hpp"

namespace fishmonger {

enum class Branch { kAdaptation, kReward, kConfirmation };

std::string_view to_string(Branch branch);
Branch parse_branch(std::string_view name);

struct PriceOffer {
  std::size_t round = 0;  // 0-based
  double price = 0.0;
  Branch branch = Branch::kAdaptation;
};

struct OfferRecord {
  PriceOffer offer;
  double estimate_before = 0.0;
  std::optional<bool> accepted;  // empty while pending
};

struct PricedDecision {
  double price = 0.0;
  bool accepted = false;
};

class MechanismState {
 public:
  MechanismState() = default;

  // Completed rounds.
  std::size_t round() const { return completed_; }
  double estimate() const { return estimate_; }
  std::size_t accepted_count() const { return accepted_; }
  bool has_pending() const { return !offers_.empty() && !offers_.back().accepted; }
  const PriceOffer& pending_offer() const;
  const std::vector<OfferRecord>& offers() const { return offers_; }

  // Draws the branch and price for the next round.
  const PriceOffer& propose(const RewardCurve& rc, RandomStream& rng);

  // Issues a specific offer. Enforces the per-branch price rule; used by
  // propose() and by tree searches that enumerate branches explicitly.
  const PriceOffer& issue(Branch branch, double price);

  // Applies the cook's decision to the pending offer; returns the new estimate.
  double apply_decision(bool accept);

 private:
  double estimate_ = 0.0;
  std::size_t completed_ = 0;
  std::size_t accepted_ = 0;
  std::vector<OfferRecord> offers_;
  std::vector<double> prices_;
};

/// Estimate after a refused confirmation price. `history` holds every offer
/// including the refused one. With k accepted among n prices sorted
/// descending Q'_1 >= ... >= Q'_n, the candidate is
/// (Q'_{n-k} + Q'_{n-k-1}) / 2 with Q'_0 := Q'_1. If the candidate is not
/// strictly below `estimate`, returns estimate * n / (n + 1) instead.
double demote(std::span<const PricedDecision> history, double estimate);

// Same rule on a bare price list with `accepted` acceptances.
double demote_prices(std::vector<double> prices, std::size_t accepted, double estimate);

}  // namespace fishmonger
