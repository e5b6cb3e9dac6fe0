#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace optstop {

enum class RewardKind {
    PowerPlus,          // (x^+)^nu
    ExpCall,            // (e^x - K)^+
    ExpPut,             // (K - e^{-x})^+
    Indicator,          // 1{x >= a}
    ExpLinear,          // exp(c + slope * x)
    PiecewiseLogLinear, // piecewise-linear log reward
    Custom,             // caller-supplied log reward
};

/// Whether the log-reward slope stays strictly above its limit at +infinity.
/// GridOnly means a sampled grid cannot rule out eventual equality.
enum class TailSlopeGap { Strict, Attained, GridOnly };

/// Nonnegative, nonconstant, nondecreasing, logconcave, right-continuous
/// reward. The log reward h = log g is what is stored and evaluated; g itself
/// is exponentiated on demand so that rewards with positive asymptotic slope
/// do not overflow at moderate x.
///
/// Invariants established at construction and preserved by every transform:
///   - h is nondecreasing and concave where finite,
///   - h'(x-) >= h'(x+) >= beta, both nonincreasing in x,
///   - g vanishes left of the edge x0 = inf{ s : g(s) > 0 },
///   - g is nonconstant.
class RewardFunction {
public:
    static RewardFunction powerPlus(double nu);
    static RewardFunction expCall(double strike);
    static RewardFunction expPut(double strike);
    static RewardFunction indicator(double edge);
    static RewardFunction expLinear(double intercept, double slope);

    /// Canonical interchange form. `slopes` has one more entry than
    /// `breakpoints`; slopes[i] applies left of breakpoints[i], slopes.back()
    /// beyond the last breakpoint. h(anchorX) = anchorLogValue. leftEdge is
    /// the positivity edge (nullopt for a reward positive on all of R); a
    /// finite edge puts a positive jump at the edge.
    static RewardFunction piecewiseLogLinear(std::vector<double> breakpoints,
                                             std::vector<double> slopes,
                                             double anchorX, double anchorLogValue,
                                             std::optional<double> leftEdge = std::nullopt);

    /// Caller-supplied h and one-sided slopes; validated on a 256-point probe
    /// grid (three-point concavity, monotone h, slope ordering) and rejected
    /// on failure. `strictTailGap` asserts h'(x-) > beta for all x; only set
    /// it when that is known analytically. `supLogValue` is lim h (defaults
    /// to +infinity).
    static RewardFunction custom(std::function<double(double)> logEval,
                                 std::function<double(double)> logDerivLeftFn,
                                 std::function<double(double)> logDerivRightFn,
                                 double leftEdge, double beta,
                                 bool strictTailGap = false,
                                 double supLogValue = std::numeric_limits<double>::infinity());

    /// g(x); zero for x < x0, finite for all finite x.
    double eval(double x) const;

    /// h(x) = log g(x); -infinity where g vanishes.
    double logEval(double x) const;

    /// h'(x-), with the convention h'(x-) = +infinity where h(x) = -infinity.
    double logDerivLeft(double x) const;

    /// h'(x+), +infinity where g vanishes to the right.
    double logDerivRight(double x) const;

    /// g'(x-) = h'(x-) g(x); zero on the vanishing region.
    double derivLeft(double x) const;

    /// g'(x+) = h'(x+) g(x).
    double derivRight(double x) const;

    /// beta = lim_{x->inf} h'(x-); equals inf_x h'(x-) by monotonicity.
    double asymptoticSlope() const { return beta_; }

    /// x0 = inf{ s : g(s) > 0 }; -infinity for everywhere-positive rewards.
    double leftEdge() const { return leftEdge_; }

    /// sup g = lim_{x->inf} g(x); +infinity for unbounded rewards.
    double supValue() const;
    double supLogValue() const { return supLog_ + logScale_; }

    /// Least x' with g constant on [x', inf), when such a point exists.
    std::optional<double> constantTailEdge() const;

    /// Verdict on "h'(x-) > beta for every x".
    TailSlopeGap tailSlopeGap() const { return tailGap_; }

    /// x -> g(min(x, cap)). cap must exceed the left edge, otherwise the
    /// result would be constant.
    RewardFunction truncateAbove(double cap) const;

    /// c * g for c > 0 (shifts h by log c; every slope quantity is unchanged).
    RewardFunction scaled(double factor) const;

    /// Piecewise-log-linear snapshot of h on the given strictly increasing
    /// grid; exact for kinds that are already piecewise, secant-based
    /// otherwise. The result is logconcave by construction.
    RewardFunction toPiecewise(std::span<const double> grid) const;

    RewardKind kind() const { return kind_; }
    std::string describe() const;

    // Parameter access for serialization; meaningful fields depend on kind().
    double paramA() const { return paramA_; }
    double paramB() const { return paramB_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& slopes() const { return slopes_; }
    double anchorX() const { return anchorX_; }
    double anchorLogValue() const { return anchorH_; }
    double logScaleFactor() const { return logScale_; }
    std::optional<double> cap() const { return cap_; }

private:
    RewardFunction() = default;
    void validateCustom() const;
    double rawLogEval(double x) const;      // before cap and scale
    double rawLogDerivLeft(double x) const;
    double rawLogDerivRight(double x) const;

    RewardKind kind_ = RewardKind::PowerPlus;
    double paramA_ = 0.0; // nu | strike | edge | intercept
    double paramB_ = 0.0; // slope (ExpLinear)
    std::vector<double> breakpoints_;
    std::vector<double> slopes_;
    std::vector<double> knotLog_; // h at each breakpoint (piecewise form)
    double anchorX_ = 0.0;
    double anchorH_ = 0.0;
    std::function<double(double)> customH_;
    std::function<double(double)> customHL_;
    std::function<double(double)> customHR_;

    double leftEdge_ = 0.0;
    double beta_ = 0.0;
    double supLog_ = 0.0;       // before scale
    double logScale_ = 0.0;
    std::optional<double> cap_;
    TailSlopeGap tailGap_ = TailSlopeGap::Attained;
    std::optional<double> constantEdge_; // before cap
};

} // namespace optstop
