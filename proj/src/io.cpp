#include "fishmonger/io.hpp"

#include <charconv>
#include <ostream>
#include <string>

#include "fishmonger/errors.hpp"

namespace fishmonger {

namespace {

// Shortest round-trip representation.
std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

nlohmann::json liminf_json(const LiminfEstimate& e) {
  return {{"tail_min", e.tail_min}, {"final", e.final_value}};
}

}  // namespace

nlohmann::json curve_to_json(const AcceptanceCurve& curve) {
  nlohmann::json j;
  j["family"] = std::string(to_string(curve.family()));
  switch (curve.family()) {
    case CurveFamily::kRational:
      j["scale"] = curve.scale();
      break;
    case CurveFamily::kExponential:
      j["rate"] = curve.rate();
      break;
    case CurveFamily::kPiecewiseLinear:
    case CurveFamily::kTabulated: {
      nlohmann::json knots = nlohmann::json::array();
      for (const Knot& k : curve.knots()) knots.push_back({k.q, k.p});
      j["knots"] = std::move(knots);
      break;
    }
  }
  return j;
}

AcceptanceCurve curve_from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw ConfigError("curve spec must be a JSON object");
  if (!spec.contains("family") || !spec["family"].is_string()) {
    throw ConfigError("curve spec is missing field 'family'");
  }
  auto number = [&spec](const char* key, double fallback) {
    if (!spec.contains(key)) return fallback;
    if (!spec[key].is_number()) throw ConfigError(std::string("curve field '") + key + "' must be a number");
    return spec[key].get<double>();
  };
  const CurveFamily family = parse_curve_family(spec["family"].get<std::string>());
  switch (family) {
    case CurveFamily::kRational:
      return AcceptanceCurve::rational(number("scale", 1.0));
    case CurveFamily::kExponential:
      return AcceptanceCurve::exponential(number("rate", 1.0));
    case CurveFamily::kPiecewiseLinear:
    case CurveFamily::kTabulated: {
      if (!spec.contains("knots") || !spec["knots"].is_array()) {
        throw ConfigError("curve spec is missing field 'knots'");
      }
      std::vector<Knot> knots;
      for (const auto& k : spec["knots"]) {
        if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
          throw ConfigError("each knot must be a [q, p] pair of numbers");
        }
        knots.push_back({k[0].get<double>(), k[1].get<double>()});
      }
      return family == CurveFamily::kTabulated ? AcceptanceCurve::tabulated(std::move(knots))
                                               : AcceptanceCurve::piecewise_linear(std::move(knots));
    }
  }
  throw ConfigError("unsupported curve family");
}

nlohmann::json to_json(const RoundRecord& r) {
  return {{"round", r.round},
          {"price", r.price},
          {"accepted", r.accepted ? 1 : 0},
          {"estimate_before", r.estimate_before},
          {"branch", std::string(to_string(r.branch))}};
}

nlohmann::json to_json(const RunStatistics& s) {
  nlohmann::json series = nlohmann::json::array();
  for (const PrefixPoint& pt : s.series) {
    series.push_back({pt.round, pt.revenue_avg, pt.surplus_avg, pt.accept_freq});
  }
  return {{"cook_type", s.cook_type},
          {"rounds", s.rounds},
          {"burn_in", s.burn_in},
          {"revenue_total", s.revenue_total},
          {"surplus_total", s.surplus_total},
          {"accepts", s.accepts},
          {"revenue_avg", s.revenue_avg},
          {"surplus_avg", s.surplus_avg},
          {"accept_freq", s.accept_freq},
          {"revenue_liminf", liminf_json(s.revenue_liminf)},
          {"surplus_liminf", liminf_json(s.surplus_liminf)},
          {"accept_liminf", liminf_json(s.accept_liminf)},
          {"branch_counts",
           {{"adaptation", s.branch_counts[0]},
            {"reward", s.branch_counts[1]},
            {"confirmation", s.branch_counts[2]}}},
          {"branch_freq",
           {{"adaptation", s.branch_freq[0]},
            {"reward", s.branch_freq[1]},
            {"confirmation", s.branch_freq[2]}}},
          {"final_estimate", s.final_estimate},
          {"welfare_residual", s.welfare_residual},
          {"series_columns", {"round", "revenue_avg", "surplus_avg", "accept_freq"}},
          {"series", std::move(series)}};
}

nlohmann::json to_json(const StatSummary& s) {
  nlohmann::json j = {{"mean", s.mean}, {"min", s.min}, {"max", s.max}};
  j["stderr"] = s.stderr_ ? nlohmann::json(*s.stderr_) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const MonteCarloSummary& s) {
  nlohmann::json runs = nlohmann::json::array();
  for (const RunStatistics& r : s.runs) {
    nlohmann::json j = to_json(r);
    j.erase("series");
    j.erase("series_columns");
    runs.push_back(std::move(j));
  }
  return {{"replications", s.replications},
          {"seeds", s.seeds},
          {"revenue_avg", to_json(s.revenue_avg)},
          {"surplus_avg", to_json(s.surplus_avg)},
          {"accept_freq", to_json(s.accept_freq)},
          {"revenue_liminf", to_json(s.revenue_liminf)},
          {"surplus_liminf", to_json(s.surplus_liminf)},
          {"accept_liminf", to_json(s.accept_liminf)},
          {"runs", std::move(runs)}};
}

nlohmann::json to_json(const OracleResult& r) {
  return {{"optimal", r.optimal},
          {"naive", r.naive},
          {"gap", r.gap},
          {"tree_size", r.tree_size},
          {"nodes_expanded", r.nodes_expanded},
          {"memo_hits", r.memo_hits}};
}

void write_history_jsonl(std::ostream& out, std::span<const RoundRecord> history) {
  for (const RoundRecord& r : history) out << to_json(r).dump() << '\n';
}

void write_prefix_csv(std::ostream& out, std::span<const PrefixPoint> series) {
  out << "round,revenue_avg,surplus_avg,accept_freq\n";
  for (const PrefixPoint& pt : series) {
    out << pt.round << ',' << num(pt.revenue_avg) << ',' << num(pt.surplus_avg) << ','
        << num(pt.accept_freq) << '\n';
  }
}

void write_distortion_csv(std::ostream& out, std::span<const DistortionRow> rows) {
  out << "q,fisher_rate,cook_rate,ratio\n";
  for (const DistortionRow& r : rows) {
    out << num(r.q) << ',' << num(r.fisher_rate) << ',' << num(r.cook_rate) << ',' << num(r.ratio)
        << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "threshold,payoff_mean,payoff_stderr,closed_form\n";
  for (const SweepRow& r : rows) {
    out << num(r.threshold) << ',' << num(r.payoff_mean) << ',' << num(r.payoff_stderr) << ','
        << num(r.closed_form) << '\n';
  }
}

}  // namespace fishmonger
