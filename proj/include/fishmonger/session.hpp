#pragma once

// Live play sessions. The server runs the committed mechanism as the fisher;
// the cook (a human or remote program) answers one offer at a time. Branch
// labels and the estimate trace stay hidden until the session finishes; the
// seed is committed by hash at creation and revealed afterwards so the
// cook can replay and audit the offer stream.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fishmonger/curves.hpp"
#include "fishmonger/mechanism.hpp"

namespace fishmonger {

/// Error with a machine-readable code and the HTTP status it maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

enum class SessionStatus { kAwaitingDecision, kOffering, kFinished };
std::string_view to_string(SessionStatus status);

std::string sha256_hex(std::string_view data);
// sha256("<seed>:<nonce>") in hex.
std::string seed_commitment(std::uint64_t seed, std::string_view nonce);

// Offers the mechanism produces for `seed` when answered with `decisions`.
// Yields decisions.size() + 1 offers (the last one unanswered) unless
// `count` caps it.
std::vector<PriceOffer> replay_offers(const AcceptanceCurve& curve, std::uint64_t seed,
                                      const std::vector<bool>& decisions,
                                      std::optional<std::size_t> count = std::nullopt);

struct AuditRound {
  double estimate_before = 0.0;
  Branch branch = Branch::kAdaptation;
};

struct AuditOptions {
  double band_width = 0.25;
  std::size_t min_band_rounds = 200;
  std::size_t min_total_rounds = 500;
  double z = 2.5758293035489004;  // two-sided 99%
};

/// Groups rounds by floor(q_n / band_width) and compares observed branch
/// counts with the sum of per-round branch probabilities. The band is
/// |observed - expected| <= z * sqrt(sum p (1 - p)).
/// Verdict: "pass", "fail" or "insufficient sample".
nlohmann::json credibility_audit(const RewardCurve& rc, std::span<const AuditRound> rounds,
                                 const AuditOptions& options = {});

class SessionStore {
 public:
  static constexpr std::size_t kDefaultRoundCap = 200;

  // With a data directory every session appends its events to
  // <dir>/<id>.jsonl and existing logs are replayed on construction.
  explicit SessionStore(std::optional<std::filesystem::path> data_dir = std::nullopt,
                        AuditOptions audit_options = {});
  ~SessionStore();

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  nlohmann::json create_session(const nlohmann::json& curve_spec,
                                std::optional<std::uint64_t> seed = std::nullopt,
                                std::optional<std::size_t> round_cap = std::nullopt);
  nlohmann::json get_offer(const std::string& id) const;
  nlohmann::json post_decision(const std::string& id, bool accept, const std::string& token);
  nlohmann::json finish(const std::string& id);
  nlohmann::json audit(const std::string& id) const;
  nlohmann::json history(const std::string& id) const;

  std::size_t size() const;

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id) const;
  void recover();

  std::optional<std::filesystem::path> data_dir_;
  AuditOptions audit_options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace fishmonger
