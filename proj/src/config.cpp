#include "fishmonger/config.hpp"

#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fishmonger/errors.hpp"
#include "fishmonger/io.hpp"

namespace fishmonger {

namespace {

namespace pt = boost::property_tree;

std::string strip(std::string s) {
  // Inline comments and optional quotes around string values.
  for (char marker : {';', '#'}) {
    if (auto pos = s.find(marker); pos != std::string::npos) s.erase(pos);
  }
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& key) {
  auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
  if (!v) return std::nullopt;
  return strip(*v);
}

double get_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field " + key + ": expected a number, got '" + text + "'");
  }
}

std::uint64_t get_u64(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    if (!text.empty() && text[0] == '-') throw std::invalid_argument(text);
    const unsigned long long v = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    // Scientific notation for round counts, e.g. 1e5.
    const double d = get_double(key, text);
    if (d < 0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
      throw ConfigError("field " + key + ": expected a nonnegative integer, got '" + text + "'");
    }
    return static_cast<std::uint64_t>(d);
  }
}

std::vector<Knot> parse_knots(const std::string& text) {
  std::vector<Knot> knots;
  std::string s = text;
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(s);
  std::string token;
  while (in >> token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("field curve.knots: expected q:p pairs, got '" + token + "'");
    }
    knots.push_back({get_double("curve.knots", token.substr(0, colon)),
                     get_double("curve.knots", token.substr(colon + 1))});
  }
  return knots;
}

}  // namespace

GameConfig RunConfig::game() const {
  GameConfig g;
  g.curve = curve;
  g.cook_type = cook_type;
  if (policy == "naive") {
    g.policy = naive(threshold.value_or(cook_type));
  } else {
    g.policy = load_script(script);
  }
  g.rounds = rounds;
  g.seed = seed;
  g.burn_in = burn_in;
  g.stride = stride;
  g.quadrature_tolerance = quadrature_tolerance;
  validate(g);
  return g;
}

OracleConfig RunConfig::oracle() const {
  OracleConfig o;
  o.horizon = horizon;
  o.grid = grid;
  o.curve = curve;
  o.cook_type = cook_type;
  o.node_budget = budget;
  return o;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json cook = {{"type", cook_type}, {"policy", policy}};
  if (policy == "naive") cook["threshold"] = threshold.value_or(cook_type);
  if (policy == "scripted") cook["script"] = script.string();
  return {{"curve", curve_spec},
          {"cook", cook},
          {"engine",
           {{"rounds", rounds},
            {"seed", seed},
            {"burn_in", burn_in},
            {"stride", stride},
            {"replications", replications},
            {"quadrature_tolerance", quadrature_tolerance}}},
          {"oracle", {{"horizon", horizon}, {"grid", grid}, {"budget", budget}}}};
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  RunConfig c;
  const auto family = get(tree, "curve.family");
  if (!family || family->empty()) throw ConfigError("missing required field curve.family");
  const CurveFamily fam = parse_curve_family(*family);
  c.curve_spec = {{"family", std::string(to_string(fam))}};
  switch (fam) {
    case CurveFamily::kRational: {
      const double scale = get(tree, "curve.scale") ? get_double("curve.scale", *get(tree, "curve.scale")) : 1.0;
      c.curve = AcceptanceCurve::rational(scale);
      c.curve_spec["scale"] = scale;
      break;
    }
    case CurveFamily::kExponential: {
      const auto rate = get(tree, "curve.rate");
      if (!rate) throw ConfigError("missing required field curve.rate");
      c.curve = AcceptanceCurve::exponential(get_double("curve.rate", *rate));
      c.curve_spec["rate"] = c.curve.rate();
      break;
    }
    case CurveFamily::kPiecewiseLinear:
    case CurveFamily::kTabulated: {
      if (auto file = get(tree, "curve.file")) {
        std::filesystem::path p(*file);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        c.curve = AcceptanceCurve::load_csv(p);
        c.curve_spec["file"] = p.string();
      } else if (auto knots = get(tree, "curve.knots")) {
        auto parsed = parse_knots(*knots);
        c.curve = fam == CurveFamily::kTabulated ? AcceptanceCurve::tabulated(std::move(parsed))
                                                 : AcceptanceCurve::piecewise_linear(std::move(parsed));
      } else {
        throw ConfigError("missing required field curve.knots (or curve.file)");
      }
      c.curve_spec = curve_to_json(c.curve);
      break;
    }
  }

  if (auto v = get(tree, "cook.type")) c.cook_type = get_double("cook.type", *v);
  if (auto v = get(tree, "cook.policy")) c.policy = *v;
  if (c.policy != "naive" && c.policy != "scripted") {
    throw ConfigError("field cook.policy: expected naive or scripted, got '" + c.policy + "'");
  }
  if (auto v = get(tree, "cook.threshold")) c.threshold = get_double("cook.threshold", *v);
  if (auto v = get(tree, "cook.script")) {
    c.script = *v;
    if (c.script.is_relative() && !base_dir.empty()) c.script = base_dir / c.script;
  }
  if (c.policy == "scripted" && c.script.empty()) {
    throw ConfigError("missing required field cook.script for scripted policy");
  }

  if (auto v = get(tree, "engine.rounds")) c.rounds = get_u64("engine.rounds", *v);
  if (auto v = get(tree, "engine.seed")) c.seed = get_u64("engine.seed", *v);
  if (auto v = get(tree, "engine.burn_in")) c.burn_in = get_u64("engine.burn_in", *v);
  if (auto v = get(tree, "engine.stride")) c.stride = get_u64("engine.stride", *v);
  if (auto v = get(tree, "engine.replications")) c.replications = get_u64("engine.replications", *v);
  if (auto v = get(tree, "engine.quadrature_tolerance")) {
    c.quadrature_tolerance = get_double("engine.quadrature_tolerance", *v);
  }
  if (auto v = get(tree, "oracle.horizon")) c.horizon = get_u64("oracle.horizon", *v);
  if (auto v = get(tree, "oracle.grid")) c.grid = get_u64("oracle.grid", *v);
  if (auto v = get(tree, "oracle.budget")) c.budget = get_double("oracle.budget", *v);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_run_config(in, path.parent_path());
}

void apply_overrides(RunConfig& config, const ConfigOverrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.rounds) {
    config.rounds = *o.rounds;
    if (config.burn_in >= config.rounds) config.burn_in = config.rounds / 10;
  }
  if (o.replications) config.replications = *o.replications;
  if (o.cook_type) config.cook_type = *o.cook_type;
  if (o.threshold) {
    config.threshold = *o.threshold;
    config.policy = "naive";
  }
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "[curve]\nfamily = " << to_string(c.curve.family()) << "\n";
  switch (c.curve.family()) {
    case CurveFamily::kRational:
      os << "scale = " << c.curve.scale() << "\n";
      break;
    case CurveFamily::kExponential:
      os << "rate = " << c.curve.rate() << "\n";
      break;
    case CurveFamily::kPiecewiseLinear:
    case CurveFamily::kTabulated:
      os << "knots =";
      for (const Knot& k : c.curve.knots()) os << ' ' << k.q << ':' << k.p;
      os << "\n";
      break;
  }
  os << "\n[cook]\ntype = " << c.cook_type << "\npolicy = " << c.policy << "\n";
  if (c.policy == "naive") os << "threshold = " << c.threshold.value_or(c.cook_type) << "\n";
  if (c.policy == "scripted") os << "script = " << std::filesystem::absolute(c.script).string() << "\n";
  os << "\n[engine]\nrounds = " << c.rounds << "\nseed = " << c.seed << "\nburn_in = " << c.burn_in
     << "\nstride = " << c.stride << "\nreplications = " << c.replications
     << "\nquadrature_tolerance = " << c.quadrature_tolerance << "\n";
  os << "\n[oracle]\nhorizon = " << c.horizon << "\ngrid = " << c.grid << "\nbudget = " << c.budget
     << "\n";
  return os.str();
}

}  // namespace fishmonger
