#pragma once

// Acceptance curves p(q), their reward curves R(q) = \int_0^q p, and the
// per-round branch distribution of the committed pricing mechanism.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fishmonger {

enum class CurveFamily { kRational, kExponential, kPiecewiseLinear, kTabulated };

std::string_view to_string(CurveFamily family);
CurveFamily parse_curve_family(std::string_view name);

struct Knot {
  double q = 0.0;
  double p = 0.0;
};

/// The committed, public acceptance curve. Built-in families:
///   rational      p(q) = q / (q + scale)
///   exponential   p(q) = 1 - exp(-rate * q)
///   piecewise-linear / tabulated: linear interpolation between knots,
///   constant after the last knot.
/// Immutable after construction.
class AcceptanceCurve {
 public:
  static AcceptanceCurve rational(double scale = 1.0);
  static AcceptanceCurve exponential(double rate);
  static AcceptanceCurve piecewise_linear(std::vector<Knot> knots);
  static AcceptanceCurve tabulated(std::vector<Knot> knots);

  // Skips the monotonicity check. Only used to feed deliberately broken
  // curves into the verifier; the mechanism refuses such curves.
  static AcceptanceCurve tabulated_unchecked(std::vector<Knot> knots);

  // Two-column CSV "q,p" with strictly increasing q. A header line is allowed.
  static AcceptanceCurve load_csv(const std::filesystem::path& path,
                                  bool validate = true);

  CurveFamily family() const { return family_; }
  double scale() const { return scale_; }
  double rate() const { return rate_; }
  const std::vector<Knot>& knots() const { return knots_; }

  // Whether the monotonicity / normalization checks were applied.
  bool validated() const { return validated_; }
  bool has_closed_form_reward() const {
    return family_ == CurveFamily::kRational ||
           family_ == CurveFamily::kExponential;
  }
  // lim_{q->inf} p(q) == 1. Knot curves qualify only if their last knot is 1.
  bool reaches_one() const;

  double operator()(double q) const;

 private:
  AcceptanceCurve() = default;
  static AcceptanceCurve from_knots(CurveFamily family, std::vector<Knot> knots,
                                    bool validate);

  CurveFamily family_ = CurveFamily::kRational;
  double scale_ = 1.0;
  double rate_ = 1.0;
  std::vector<Knot> knots_;
  bool validated_ = true;
};

enum class RewardMethod { kClosedForm, kQuadrature };

struct BranchDistribution {
  double adaptation = 1.0;
  double reward = 0.0;
  double confirmation = 0.0;
};

/// R(q) for a given acceptance curve. Closed form where available, otherwise
/// adaptive Gauss-Kronrod quadrature. For knot curves the integral up to each
/// knot is computed once at construction so a query only integrates within
/// its own segment.
class RewardCurve {
 public:
  static constexpr double kDefaultTolerance = 1e-10;

  explicit RewardCurve(AcceptanceCurve curve,
                       double quadrature_tolerance = kDefaultTolerance);
  RewardCurve(AcceptanceCurve curve, RewardMethod method,
              double quadrature_tolerance = kDefaultTolerance);

  const AcceptanceCurve& curve() const { return curve_; }
  RewardMethod method() const { return method_; }
  double tolerance() const { return tolerance_; }

  double p(double q) const { return curve_(q); }
  double R(double q) const;

 private:
  double integrate(double a, double b) const;

  AcceptanceCurve curve_;
  RewardMethod method_;
  double tolerance_;
  std::vector<double> knot_integrals_;
};

double eval_p(const AcceptanceCurve& curve, double q);
double eval_R(const RewardCurve& rc, double q);

// (1 - p, R/q, p - R/q) without any validity checks; R/q := 0 at q = 0.
BranchDistribution raw_branch_distribution(const RewardCurve& rc, double q_n);

// Throws CurveValidityError when the confirmation probability is below
// -1e-12. Tiny negative round-off is clamped to zero.
BranchDistribution branch_distribution(const RewardCurve& rc, double q_n);

// Stationary per-round surplus of a type-q cook when the estimate is pinned
// at x: (q - x) p(x) + R(x).
double naive_payoff(const RewardCurve& rc, double q, double x);

}  // namespace fishmonger
