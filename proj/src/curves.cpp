#include "fishmonger/curves.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fishmonger/errors.hpp"

namespace fishmonger {

namespace {

constexpr double kSimplexSlack = 1e-12;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// x - log1p(x), accurate for small x.
double x_minus_log1p(double x) {
  if (x < 1e-3) {
    // x^2/2 - x^3/3 + x^4/4 - x^5/5 + x^6/6
    const double x2 = x * x;
    return x2 * (0.5 - x * (1.0 / 3.0 - x * (0.25 - x * (0.2 - x / 6.0))));
  }
  return x - std::log1p(x);
}

// x - (1 - e^{-x}) = x + expm1(-x), accurate for small x.
double x_minus_one_minus_exp(double x) {
  if (x < 1e-3) {
    // x^2/2 - x^3/6 + x^4/24 - x^5/120 + x^6/720
    const double x2 = x * x;
    return x2 * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x * (1.0 / 120.0 - x / 720.0))));
  }
  return x + std::expm1(-x);
}

void require_nonnegative(double q, const char* what) {
  if (!(q >= 0.0) || !std::isfinite(q)) {
    throw ConfigError(std::string(what) + " must be a finite value >= 0, got " +
                      fmt_double(q));
  }
}

}  // namespace

std::string_view to_string(CurveFamily family) {
  switch (family) {
    case CurveFamily::kRational:
      return "rational";
    case CurveFamily::kExponential:
      return "exponential";
    case CurveFamily::kPiecewiseLinear:
      return "piecewise-linear";
    case CurveFamily::kTabulated:
      return "tabulated";
  }
  return "unknown";
}

CurveFamily parse_curve_family(std::string_view name) {
  if (name == "rational") return CurveFamily::kRational;
  if (name == "exponential") return CurveFamily::kExponential;
  if (name == "piecewise-linear" || name == "piecewise_linear")
    return CurveFamily::kPiecewiseLinear;
  if (name == "tabulated") return CurveFamily::kTabulated;
  throw ConfigError("unknown curve family '" + std::string(name) + "'");
}

AcceptanceCurve AcceptanceCurve::rational(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("rational curve scale must be > 0, got " + fmt_double(scale));
  }
  AcceptanceCurve c;
  c.family_ = CurveFamily::kRational;
  c.scale_ = scale;
  return c;
}

AcceptanceCurve AcceptanceCurve::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError("exponential curve rate must be > 0, got " + fmt_double(rate));
  }
  AcceptanceCurve c;
  c.family_ = CurveFamily::kExponential;
  c.rate_ = rate;
  return c;
}

AcceptanceCurve AcceptanceCurve::from_knots(CurveFamily family,
                                            std::vector<Knot> knots,
                                            bool validate) {
  if (knots.empty()) throw ConfigError("knot curve needs at least one knot");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const Knot& k = knots[i];
    if (!std::isfinite(k.q) || !std::isfinite(k.p) || k.q < 0.0) {
      throw ConfigError("knot " + std::to_string(i) + " is not a finite point with q >= 0");
    }
    if (i > 0 && !(k.q > knots[i - 1].q)) {
      throw ConfigError("knot q values must be strictly increasing (knot " +
                        std::to_string(i) + ", q=" + fmt_double(k.q) + ")");
    }
  }
  for (Knot& k : knots) k.p = std::clamp(k.p, 0.0, 1.0);

  // p(0) = 0 is part of the curve's normalization.
  if (knots.front().q == 0.0) {
    if (knots.front().p != 0.0) {
      throw ConfigError("acceptance curve must satisfy p(0) = 0, got p(0)=" +
                        fmt_double(knots.front().p));
    }
  } else {
    knots.insert(knots.begin(), Knot{0.0, 0.0});
  }

  if (validate) {
    for (std::size_t i = 1; i < knots.size(); ++i) {
      if (knots[i].p < knots[i - 1].p) {
        throw ConfigError("acceptance curve is not monotone: p(" +
                          fmt_double(knots[i].q) + ")=" + fmt_double(knots[i].p) +
                          " < p(" + fmt_double(knots[i - 1].q) +
                          ")=" + fmt_double(knots[i - 1].p));
      }
    }
  }

  AcceptanceCurve c;
  c.family_ = family;
  c.knots_ = std::move(knots);
  c.validated_ = validate;
  return c;
}

AcceptanceCurve AcceptanceCurve::piecewise_linear(std::vector<Knot> knots) {
  return from_knots(CurveFamily::kPiecewiseLinear, std::move(knots), true);
}

AcceptanceCurve AcceptanceCurve::tabulated(std::vector<Knot> knots) {
  return from_knots(CurveFamily::kTabulated, std::move(knots), true);
}

AcceptanceCurve AcceptanceCurve::tabulated_unchecked(std::vector<Knot> knots) {
  return from_knots(CurveFamily::kTabulated, std::move(knots), false);
}

AcceptanceCurve AcceptanceCurve::load_csv(const std::filesystem::path& path,
                                          bool validate) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open curve table " + path.string());
  std::vector<Knot> knots;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    Knot k;
    if (!(fields >> k.q >> k.p)) {
      if (knots.empty() && line_no == 1) continue;  // header
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected two numeric columns q,p");
    }
    knots.push_back(k);
  }
  return from_knots(CurveFamily::kTabulated, std::move(knots), validate);
}

bool AcceptanceCurve::reaches_one() const {
  if (has_closed_form_reward()) return true;
  return knots_.back().p >= 1.0 - 1e-12;
}

double AcceptanceCurve::operator()(double q) const {
  require_nonnegative(q, "valuation q");
  switch (family_) {
    case CurveFamily::kRational:
      return q / (q + scale_);
    case CurveFamily::kExponential:
      return -std::expm1(-rate_ * q);
    case CurveFamily::kPiecewiseLinear:
    case CurveFamily::kTabulated: {
      if (q >= knots_.back().q) return knots_.back().p;
      auto hi = std::upper_bound(knots_.begin(), knots_.end(), q,
                                 [](double v, const Knot& k) { return v < k.q; });
      auto lo = std::prev(hi);
      const double t = (q - lo->q) / (hi->q - lo->q);
      return lo->p + t * (hi->p - lo->p);
    }
  }
  return 0.0;
}

RewardCurve::RewardCurve(AcceptanceCurve curve, double quadrature_tolerance)
    : RewardCurve(curve,
                  curve.has_closed_form_reward() ? RewardMethod::kClosedForm
                                                 : RewardMethod::kQuadrature,
                  quadrature_tolerance) {}

RewardCurve::RewardCurve(AcceptanceCurve curve, RewardMethod method,
                         double quadrature_tolerance)
    : curve_(std::move(curve)), method_(method), tolerance_(quadrature_tolerance) {
  if (!(tolerance_ > 0.0)) throw ConfigError("quadrature tolerance must be > 0");
  if (method_ == RewardMethod::kClosedForm && !curve_.has_closed_form_reward()) {
    throw ConfigError("curve family '" + std::string(to_string(curve_.family())) +
                      "' has no closed-form reward curve");
  }
  if (method_ == RewardMethod::kQuadrature && !curve_.knots().empty()) {
    const auto& knots = curve_.knots();
    knot_integrals_.resize(knots.size(), 0.0);
    for (std::size_t i = 1; i < knots.size(); ++i) {
      knot_integrals_[i] = knot_integrals_[i - 1] + integrate(knots[i - 1].q, knots[i].q);
    }
  }
}

double RewardCurve::integrate(double a, double b) const {
  if (b <= a) return 0.0;
  // p <= 1, so the L1 norm over [a,b] is at most b - a and a relative
  // tolerance of tol/(b-a) bounds the absolute error by tol.
  const double rel = std::max(tolerance_ / (b - a), 4 * std::numeric_limits<double>::epsilon());
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [this](double t) { return curve_(t); }, a, b, 20, rel, &error);
  if (!(error <= tolerance_)) {
    throw NumericalError("quadrature of p over [" + fmt_double(a) + ", " + fmt_double(b) +
                         "] did not converge: error estimate " + fmt_double(error) +
                         " > tolerance " + fmt_double(tolerance_));
  }
  return value;
}

double RewardCurve::R(double q) const {
  require_nonnegative(q, "valuation q");
  if (q == 0.0) return 0.0;
  if (method_ == RewardMethod::kClosedForm) {
    if (curve_.family() == CurveFamily::kRational) {
      const double s = curve_.scale();
      return s * x_minus_log1p(q / s);
    }
    const double lambda = curve_.rate();
    return x_minus_one_minus_exp(lambda * q) / lambda;
  }
  const auto& knots = curve_.knots();
  if (knots.empty()) return integrate(0.0, q);
  if (q >= knots.back().q) {
    return knot_integrals_.back() + knots.back().p * (q - knots.back().q);
  }
  auto hi = std::upper_bound(knots.begin(), knots.end(), q,
                             [](double v, const Knot& k) { return v < k.q; });
  const std::size_t lo = static_cast<std::size_t>(std::prev(hi) - knots.begin());
  return knot_integrals_[lo] + integrate(knots[lo].q, q);
}

double eval_p(const AcceptanceCurve& curve, double q) { return curve(q); }

double eval_R(const RewardCurve& rc, double q) { return rc.R(q); }

BranchDistribution raw_branch_distribution(const RewardCurve& rc, double q_n) {
  if (q_n == 0.0) return {1.0, 0.0, 0.0};
  const double p = rc.p(q_n);
  const double reward = rc.R(q_n) / q_n;
  return {1.0 - p, reward, p - reward};
}

BranchDistribution branch_distribution(const RewardCurve& rc, double q_n) {
  BranchDistribution d = raw_branch_distribution(rc, q_n);
  if (d.confirmation < -kSimplexSlack) {
    throw CurveValidityError("negative confirmation probability " +
                             fmt_double(d.confirmation) + " at q_n=" + fmt_double(q_n) +
                             " (q p(q) < R(q): the curve is not monotone)");
  }
  if (d.confirmation < 0.0) {
    d.reward += d.confirmation;
    d.confirmation = 0.0;
  }
  return d;
}

double naive_payoff(const RewardCurve& rc, double q, double x) {
  require_nonnegative(q, "type q");
  return (q - x) * rc.p(x) + rc.R(x);
}

}  // namespace fishmonger
