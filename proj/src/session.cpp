#include "fishmonger/session.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <openssl/evp.h>

#include "fishmonger/errors.hpp"
#include "fishmonger/io.hpp"
#include "fishmonger/rng.hpp"

namespace fishmonger {

namespace {

constexpr const char* kMechanismDescription =
    "Each round the fisher holds an estimate q_n (q_0 = 0) and draws one of three prices: "
    "with probability 1 - p(q_n) an adaptation price uniform on [q_n, q_n + 1] (accepting it "
    "sets q_{n+1} to that price); with probability R(q_n)/q_n a reward price of 0; otherwise a "
    "confirmation price equal to q_n (refusing it lowers the estimate by the reorder-midpoint "
    "rule, falling back to q_n * n / (n + 1)). R is the integral of p from 0.";

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms
     << 'Z';
  return os.str();
}

std::string random_hex(std::size_t bytes) {
  std::random_device rd;
  std::ostringstream os;
  for (std::size_t i = 0; i < bytes; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << (rd() & 0xFF);
  }
  return os.str();
}

std::uint64_t random_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

nlohmann::json offer_json(const PriceOffer& offer) {
  return {{"round", offer.round + 1}, {"price", offer.price}};
}

}  // namespace

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::kAwaitingDecision:
      return "awaiting-decision";
    case SessionStatus::kOffering:
      return "offering";
    case SessionStatus::kFinished:
      return "finished";
  }
  return "unknown";
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string seed_commitment(std::uint64_t seed, std::string_view nonce) {
  return sha256_hex(std::to_string(seed) + ":" + std::string(nonce));
}

std::vector<PriceOffer> replay_offers(const AcceptanceCurve& curve, std::uint64_t seed,
                                      const std::vector<bool>& decisions,
                                      std::optional<std::size_t> count) {
  const RewardCurve rc(curve);
  RandomStream rng(seed);
  MechanismState state;
  const std::size_t total = count.value_or(decisions.size() + 1);
  std::vector<PriceOffer> offers;
  offers.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    offers.push_back(state.propose(rc, rng));
    if (i >= decisions.size()) break;
    state.apply_decision(decisions[i]);
  }
  return offers;
}

nlohmann::json credibility_audit(const RewardCurve& rc, std::span<const AuditRound> rounds,
                                 const AuditOptions& options) {
  struct Band {
    std::size_t rounds = 0;
    std::array<std::size_t, 3> observed{};
    std::array<double, 3> expected{};
    std::array<double, 3> variance{};
  };
  std::map<long long, Band> bands;
  for (const AuditRound& r : rounds) {
    const auto key = static_cast<long long>(std::floor(r.estimate_before / options.band_width));
    Band& b = bands[key];
    ++b.rounds;
    ++b.observed[static_cast<std::size_t>(r.branch)];
    const BranchDistribution d = branch_distribution(rc, r.estimate_before);
    const std::array<double, 3> probs{d.adaptation, d.reward, d.confirmation};
    for (std::size_t i = 0; i < 3; ++i) {
      b.expected[i] += probs[i];
      b.variance[i] += probs[i] * (1.0 - probs[i]);
    }
  }

  static constexpr std::array<const char*, 3> kNames{"adaptation", "reward", "confirmation"};
  nlohmann::json out_bands = nlohmann::json::array();
  bool any_sufficient = false;
  bool all_pass = true;
  for (const auto& [key, b] : bands) {
    const double lo = static_cast<double>(key) * options.band_width;
    const double mid = lo + 0.5 * options.band_width;
    const BranchDistribution at_mid = branch_distribution(rc, mid);
    const std::array<double, 3> mid_probs{at_mid.adaptation, at_mid.reward, at_mid.confirmation};
    const bool sufficient = b.rounds >= options.min_band_rounds;
    nlohmann::json branches = nlohmann::json::object();
    bool band_pass = true;
    for (std::size_t i = 0; i < 3; ++i) {
      const double n = static_cast<double>(b.rounds);
      const double half_width = options.z * std::sqrt(b.variance[i]) + 1e-9;
      const double deviation = static_cast<double>(b.observed[i]) - b.expected[i];
      const bool inside = std::abs(deviation) <= half_width;
      band_pass = band_pass && inside;
      branches[kNames[i]] = {{"observed", b.observed[i]},
                             {"observed_freq", static_cast<double>(b.observed[i]) / n},
                             {"expected_freq", b.expected[i] / n},
                             {"band_low", (b.expected[i] - half_width) / n},
                             {"band_high", (b.expected[i] + half_width) / n},
                             {"theory_at_midpoint", mid_probs[i]},
                             {"inside", inside}};
    }
    std::string verdict = "insufficient sample";
    if (sufficient) {
      any_sufficient = true;
      verdict = band_pass ? "pass" : "fail";
      all_pass = all_pass && band_pass;
    }
    out_bands.push_back({{"q_low", lo},
                         {"q_high", lo + options.band_width},
                         {"rounds", b.rounds},
                         {"branches", branches},
                         {"verdict", verdict}});
  }

  std::string verdict;
  if (rounds.size() < options.min_total_rounds || !any_sufficient) {
    verdict = "insufficient sample";
  } else {
    verdict = all_pass ? "pass" : "fail";
  }
  return {{"band_width", options.band_width},
          {"confidence", 0.99},
          {"min_band_rounds", options.min_band_rounds},
          {"rounds", rounds.size()},
          {"bands", out_bands},
          {"verdict", verdict}};
}

struct SessionStore::Session {
  struct Event {
    PriceOffer offer;
    double estimate_before = 0.0;
    bool accepted = false;
    std::string time;
  };
  struct TokenResult {
    bool accept = false;
    nlohmann::json result;
  };

  Session(std::string id_, nlohmann::json spec, AcceptanceCurve c, std::uint64_t seed_,
          std::string nonce_, bool client_seed_, std::size_t cap, std::string created)
      : id(std::move(id_)),
        curve_spec(std::move(spec)),
        curve(std::move(c)),
        rc(curve),
        seed(seed_),
        nonce(std::move(nonce_)),
        commitment(seed_commitment(seed, nonce)),
        client_seed(client_seed_),
        round_cap(cap),
        created_at(std::move(created)),
        rng(seed) {
    status = SessionStatus::kOffering;
    state.propose(rc, rng);
    status = SessionStatus::kAwaitingDecision;
  }

  nlohmann::json commitment_json() const {
    return {{"curve", curve_spec},
            {"mechanism", kMechanismDescription},
            {"seed_commitment", commitment},
            {"seed_commitment_scheme", "sha256(\"<seed>:<nonce>\"), revealed at finish"},
            {"seed_chosen_by_client", client_seed}};
  }

  nlohmann::json public_stats() const {
    double revenue = 0.0;
    std::size_t accepts = 0;
    nlohmann::json prices = nlohmann::json::array();
    nlohmann::json decisions = nlohmann::json::array();
    for (const Event& e : events) {
      prices.push_back(e.offer.price);
      decisions.push_back(e.accepted ? 1 : 0);
      if (e.accepted) {
        ++accepts;
        revenue += e.offer.price;
      }
    }
    return {{"rounds_played", events.size()},
            {"accept_count", accepts},
            {"revenue_total", revenue},
            {"price_history", prices},
            {"decision_history", decisions}};
  }

  void append_log(const nlohmann::json& line) const {
    if (!log_path || replaying) return;
    std::ofstream out(*log_path, std::ios::app);
    out << line.dump() << '\n';
    out.flush();
    if (!out) throw ServiceError(500, "persistence_failed", "cannot append to session log");
  }

  nlohmann::json decide(bool accept, const std::string& token, const std::string& time) {
    const PriceOffer offer = state.pending_offer();
    const double before = state.estimate();
    state.apply_decision(accept);
    events.push_back({offer, before, accept, time});

    nlohmann::json result = {{"session_id", id},
                             {"round", offer.round + 1},
                             {"price", offer.price},
                             {"accepted", accept},
                             {"revenue", accept ? offer.price : 0.0}};
    if (events.size() >= round_cap) {
      status = SessionStatus::kFinished;
      finished_at = time;
      result["status"] = std::string(to_string(status));
      result["next_offer"] = nullptr;
    } else {
      status = SessionStatus::kOffering;
      const PriceOffer& next = state.propose(rc, rng);
      status = SessionStatus::kAwaitingDecision;
      result["status"] = std::string(to_string(status));
      result["next_offer"] = offer_json(next);
    }
    tokens[token] = {accept, result};
    return result;
  }

  void mark_finished(const std::string& time) {
    status = SessionStatus::kFinished;
    finished_at = time;
  }

  std::string id;
  nlohmann::json curve_spec;
  AcceptanceCurve curve;
  RewardCurve rc;
  std::uint64_t seed;
  std::string nonce;
  std::string commitment;
  bool client_seed;
  std::size_t round_cap;
  std::string created_at;
  std::string finished_at;
  SessionStatus status = SessionStatus::kOffering;
  MechanismState state;
  RandomStream rng;
  std::vector<Event> events;
  std::map<std::string, TokenResult> tokens;
  std::optional<std::filesystem::path> log_path;
  bool replaying = false;
  mutable std::mutex mutex;
};

SessionStore::SessionStore(std::optional<std::filesystem::path> data_dir,
                           AuditOptions audit_options)
    : data_dir_(std::move(data_dir)), audit_options_(audit_options) {
  if (data_dir_) {
    std::filesystem::create_directories(*data_dir_);
    recover();
  }
}

SessionStore::~SessionStore() = default;

std::size_t SessionStore::size() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "not_found", "unknown session '" + id + "'");
  return it->second;
}

nlohmann::json SessionStore::create_session(const nlohmann::json& curve_spec,
                                            std::optional<std::uint64_t> seed,
                                            std::optional<std::size_t> round_cap) {
  AcceptanceCurve curve = AcceptanceCurve::rational();
  try {
    curve = curve_from_json(curve_spec);
  } catch (const ConfigError& e) {
    throw ServiceError(400, "invalid_curve", e.what());
  }
  const std::size_t cap = round_cap.value_or(kDefaultRoundCap);
  if (cap < 1) throw ServiceError(400, "invalid_round_cap", "round cap must be >= 1");

  const std::string id = random_hex(16);
  const std::uint64_t s = seed ? *seed : random_seed();
  const std::string created = now_utc();
  auto session = std::make_shared<Session>(id, curve_to_json(curve), std::move(curve), s,
                                           random_hex(16), seed.has_value(), cap, created);
  if (data_dir_) {
    session->log_path = *data_dir_ / (id + ".jsonl");
    session->append_log({{"event", "create"},
                         {"id", id},
                         {"curve", session->curve_spec},
                         {"seed", s},
                         {"nonce", session->nonce},
                         {"client_seed", session->client_seed},
                         {"round_cap", cap},
                         {"time", created}});
  }

  nlohmann::json response = {{"session_id", id},
                             {"status", std::string(to_string(session->status))},
                             {"round_cap", cap},
                             {"commitment", session->commitment_json()},
                             {"offer", offer_json(session->state.pending_offer())}};
  std::unique_lock lock(mutex_);
  sessions_.emplace(id, std::move(session));
  return response;
}

nlohmann::json SessionStore::get_offer(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (s->status == SessionStatus::kFinished) {
    throw ServiceError(409, "session_finished", "session finished");
  }
  nlohmann::json out = offer_json(s->state.pending_offer());
  out["session_id"] = id;
  out["status"] = std::string(to_string(s->status));
  out["round_cap"] = s->round_cap;
  out["public"] = s->public_stats();
  return out;
}

nlohmann::json SessionStore::post_decision(const std::string& id, bool accept,
                                           const std::string& token) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (token.empty()) {
    throw ServiceError(409, "token_required", "decision requires an idempotency token");
  }
  if (auto it = s->tokens.find(token); it != s->tokens.end()) {
    if (it->second.accept != accept) {
      throw ServiceError(409, "token_conflict",
                         "idempotency token already used with a different decision");
    }
    return it->second.result;
  }
  if (s->status == SessionStatus::kFinished) {
    throw ServiceError(409, "session_finished", "session finished");
  }
  const std::string time = now_utc();
  s->append_log({{"event", "decision"}, {"accept", accept}, {"token", token}, {"time", time}});
  return s->decide(accept, token, time);
}

nlohmann::json SessionStore::finish(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (s->status != SessionStatus::kFinished) {
    const std::string time = now_utc();
    s->append_log({{"event", "finish"}, {"time", time}});
    s->mark_finished(time);
  }
  return {{"session_id", id},
          {"status", std::string(to_string(s->status))},
          {"rounds_played", s->events.size()},
          {"seed", s->seed},
          {"nonce", s->nonce}};
}

nlohmann::json SessionStore::audit(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (s->status != SessionStatus::kFinished) {
    throw ServiceError(403, "forbidden", "audit is available only after the session finishes");
  }
  std::vector<AuditRound> rounds;
  std::vector<bool> decisions;
  nlohmann::json trace = nlohmann::json::array();
  for (const Session::Event& e : s->events) {
    rounds.push_back({e.estimate_before, e.offer.branch});
    decisions.push_back(e.accepted);
    trace.push_back({{"round", e.offer.round + 1},
                     {"price", e.offer.price},
                     {"accepted", e.accepted},
                     {"branch", std::string(to_string(e.offer.branch))},
                     {"estimate_before", e.estimate_before}});
  }

  // Offers actually drawn, including an unanswered one at an explicit finish.
  std::vector<PriceOffer> drawn;
  for (const OfferRecord& rec : s->state.offers()) drawn.push_back(rec.offer);
  const std::vector<PriceOffer> replayed = replay_offers(s->curve, s->seed, decisions, drawn.size());
  bool replay_match = replayed.size() == drawn.size();
  for (std::size_t i = 0; replay_match && i < drawn.size(); ++i) {
    replay_match = replayed[i].price == drawn[i].price && replayed[i].branch == drawn[i].branch;
  }

  return {{"session_id", id},
          {"commitment", s->commitment_json()},
          {"seed", s->seed},
          {"nonce", s->nonce},
          {"commitment_verified", seed_commitment(s->seed, s->nonce) == s->commitment},
          {"replay_matches", replay_match},
          {"rounds", trace},
          {"credibility", credibility_audit(s->rc, rounds, audit_options_)}};
}

nlohmann::json SessionStore::history(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mutex);
  const bool reveal = s->status == SessionStatus::kFinished;
  nlohmann::json rounds = nlohmann::json::array();
  for (const Session::Event& e : s->events) {
    nlohmann::json r = {{"round", e.offer.round + 1},
                        {"price", e.offer.price},
                        {"accepted", e.accepted},
                        {"time", e.time}};
    if (reveal) {
      r["branch"] = std::string(to_string(e.offer.branch));
      r["estimate_before"] = e.estimate_before;
    }
    rounds.push_back(std::move(r));
  }
  return {{"session_id", id},
          {"status", std::string(to_string(s->status))},
          {"commitment", s->commitment_json()},
          {"created_at", s->created_at},
          {"rounds", rounds}};
}

void SessionStore::recover() {
  for (const auto& entry : std::filesystem::directory_iterator(*data_dir_)) {
    if (entry.path().extension() != ".jsonl") continue;
    std::ifstream in(entry.path());
    std::string line;
    std::shared_ptr<Session> session;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json ev;
      try {
        ev = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        break;  // torn final write
      }
      const std::string kind = ev.value("event", "");
      if (kind == "create") {
        session = std::make_shared<Session>(
            ev.at("id").get<std::string>(), ev.at("curve"), curve_from_json(ev.at("curve")),
            ev.at("seed").get<std::uint64_t>(), ev.at("nonce").get<std::string>(),
            ev.value("client_seed", false), ev.at("round_cap").get<std::size_t>(),
            ev.value("time", ""));
        session->log_path = entry.path();
      } else if (session && kind == "decision") {
        session->replaying = true;
        session->decide(ev.at("accept").get<bool>(), ev.at("token").get<std::string>(),
                        ev.value("time", ""));
        session->replaying = false;
      } else if (session && kind == "finish") {
        session->mark_finished(ev.value("time", ""));
      }
    }
    if (session) sessions_.emplace(session->id, std::move(session));
  }
}

}  // namespace fishmonger
