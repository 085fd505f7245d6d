#pragma once

// JSON / JSON-lines / CSV encodings of curves, histories and statistics.

#include <iosfwd>
#include <span>

#include <json.hpp>

#include "fishmonger/curves.hpp"
#include "fishmonger/engine.hpp"
#include "fishmonger/oracle.hpp"
#include "fishmonger/verifier.hpp"

namespace fishmonger {

// {"family": "rational", "scale": 1} | {"family": "exponential", "rate": l}
// | {"family": "piecewise-linear" | "tabulated", "knots": [[q, p], ...]}
nlohmann::json curve_to_json(const AcceptanceCurve& curve);
AcceptanceCurve curve_from_json(const nlohmann::json& spec);

nlohmann::json to_json(const RoundRecord& record);
nlohmann::json to_json(const RunStatistics& stats);
nlohmann::json to_json(const StatSummary& summary);
nlohmann::json to_json(const MonteCarloSummary& summary);
nlohmann::json to_json(const OracleResult& result);

// One RoundRecord per line.
void write_history_jsonl(std::ostream& out, std::span<const RoundRecord> history);
// round,revenue_avg,surplus_avg,accept_freq
void write_prefix_csv(std::ostream& out, std::span<const PrefixPoint> series);
void write_distortion_csv(std::ostream& out, std::span<const DistortionRow> rows);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace fishmonger
