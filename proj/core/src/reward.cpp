#include "optstop/reward.hpp"

#include "optstop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace optstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

RewardFunction RewardFunction::powerPlus(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu))
        throw PreconditionViolation("reward", "PowerPlus exponent must be a positive real");
    RewardFunction f;
    f.kind_ = RewardKind::PowerPlus;
    f.paramA_ = nu;
    f.leftEdge_ = 0.0;
    f.beta_ = 0.0;
    f.supLog_ = kInf;
    f.tailGap_ = TailSlopeGap::Strict;
    return f;
}

RewardFunction RewardFunction::expCall(double strike) {
    if (!(strike > 0.0) || !std::isfinite(strike))
        throw PreconditionViolation("reward", "ExpCall strike must be a positive real");
    RewardFunction f;
    f.kind_ = RewardKind::ExpCall;
    f.paramA_ = strike;
    f.leftEdge_ = std::log(strike);
    f.beta_ = 1.0;
    f.supLog_ = kInf;
    f.tailGap_ = TailSlopeGap::Strict;
    return f;
}

RewardFunction RewardFunction::expPut(double strike) {
    if (!(strike > 0.0) || !std::isfinite(strike))
        throw PreconditionViolation("reward", "ExpPut strike must be a positive real");
    RewardFunction f;
    f.kind_ = RewardKind::ExpPut;
    f.paramA_ = strike;
    f.leftEdge_ = -std::log(strike);
    f.beta_ = 0.0;
    f.supLog_ = std::log(strike);
    f.tailGap_ = TailSlopeGap::Strict;
    return f;
}

RewardFunction RewardFunction::indicator(double edge) {
    if (!std::isfinite(edge))
        throw PreconditionViolation("reward", "Indicator edge must be finite");
    RewardFunction f;
    f.kind_ = RewardKind::Indicator;
    f.paramA_ = edge;
    f.leftEdge_ = edge;
    f.beta_ = 0.0;
    f.supLog_ = 0.0;
    f.tailGap_ = TailSlopeGap::Attained;
    f.constantEdge_ = edge;
    return f;
}

RewardFunction RewardFunction::expLinear(double intercept, double slope) {
    if (!std::isfinite(intercept) || !std::isfinite(slope))
        throw PreconditionViolation("reward", "ExpLinear parameters must be finite");
    if (!(slope > 0.0))
        throw PreconditionViolation("reward",
                                    "ExpLinear slope must be strictly positive; slope 0 is a constant reward");
    RewardFunction f;
    f.kind_ = RewardKind::ExpLinear;
    f.paramA_ = intercept;
    f.paramB_ = slope;
    f.leftEdge_ = -kInf;
    f.beta_ = slope;
    f.supLog_ = kInf;
    f.tailGap_ = TailSlopeGap::Attained;
    return f;
}

RewardFunction RewardFunction::piecewiseLogLinear(std::vector<double> breakpoints,
                                                  std::vector<double> slopes,
                                                  double anchorX, double anchorLogValue,
                                                  std::optional<double> leftEdge) {
    if (slopes.size() != breakpoints.size() + 1)
        throw PreconditionViolation("reward", "piecewise form needs one more slope than breakpoints");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i - 1] < breakpoints[i]))
            throw PreconditionViolation("reward", "breakpoints must be strictly increasing");
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        if (!std::isfinite(slopes[i]) || slopes[i] < 0.0)
            throw PreconditionViolation("reward",
                                        "slopes must be finite and nonnegative (nondecreasing reward)");
        if (i > 0 && slopes[i] > slopes[i - 1] + 1e-15)
            throw PreconditionViolation("reward",
                                        "slopes must be nonincreasing (logconcave reward)");
    }
    if (!std::isfinite(anchorX) || !std::isfinite(anchorLogValue))
        throw PreconditionViolation("reward", "anchor must be finite");
    const double edge = leftEdge ? *leftEdge : -kInf;
    if (leftEdge && !std::isfinite(*leftEdge))
        throw PreconditionViolation("reward", "finite left edge expected (omit it for none)");
    if (anchorX < edge)
        throw PreconditionViolation("reward", "anchor must sit at or right of the left edge");
    const double maxSlope = slopes.empty() ? 0.0 : slopes.front();
    if (maxSlope == 0.0 && !leftEdge)
        throw PreconditionViolation("reward", "all-zero slopes without a left edge give a constant reward");

    RewardFunction f;
    f.kind_ = RewardKind::PiecewiseLogLinear;
    f.breakpoints_ = std::move(breakpoints);
    f.slopes_ = std::move(slopes);
    f.anchorX_ = anchorX;
    f.anchorH_ = anchorLogValue;
    f.leftEdge_ = edge;
    f.beta_ = f.slopes_.back();

    // h at each breakpoint, anchored afterwards.
    f.knotLog_.resize(f.breakpoints_.size());
    if (!f.breakpoints_.empty()) {
        f.knotLog_[0] = 0.0;
        for (std::size_t i = 1; i < f.breakpoints_.size(); ++i)
            f.knotLog_[i] = f.knotLog_[i - 1] + f.slopes_[i] * (f.breakpoints_[i] - f.breakpoints_[i - 1]);
        const double offset = anchorLogValue - f.rawLogEval(anchorX);
        for (auto& v : f.knotLog_) v += offset;
    }

    if (f.beta_ == 0.0) {
        std::size_t j = f.slopes_.size();
        while (j > 0 && f.slopes_[j - 1] == 0.0) --j;
        // slopes_[j..] are all zero
        f.constantEdge_ = (j == 0) ? edge : f.breakpoints_[j - 1];
        f.supLog_ = f.rawLogEval(std::max(*f.constantEdge_, edge));
    } else {
        f.supLog_ = kInf;
    }
    f.tailGap_ = TailSlopeGap::Attained;
    return f;
}

RewardFunction RewardFunction::custom(std::function<double(double)> logEval,
                                      std::function<double(double)> logDerivLeftFn,
                                      std::function<double(double)> logDerivRightFn,
                                      double leftEdge, double beta,
                                      bool strictTailGap, double supLogValue) {
    if (!logEval || !logDerivLeftFn || !logDerivRightFn)
        throw PreconditionViolation("reward", "custom reward needs h and both one-sided slopes");
    if (!(beta >= 0.0))
        throw PreconditionViolation("reward", "asymptotic slope must be nonnegative");
    RewardFunction f;
    f.kind_ = RewardKind::Custom;
    f.customH_ = std::move(logEval);
    f.customHL_ = std::move(logDerivLeftFn);
    f.customHR_ = std::move(logDerivRightFn);
    f.leftEdge_ = leftEdge;
    f.beta_ = beta;
    f.supLog_ = supLogValue;
    f.tailGap_ = strictTailGap ? TailSlopeGap::Strict : TailSlopeGap::GridOnly;
    f.validateCustom();
    return f;
}

void RewardFunction::validateCustom() const {
    // 256-point probe: h nondecreasing, three-point concavity, slope ordering.
    const double lo = std::isfinite(leftEdge_) ? leftEdge_ : std::min(-50.0, anchorX_ - 50.0);
    const double hi = std::max(leftEdge_ > -kInf ? leftEdge_ : 0.0, 0.0) + 50.0;
    const int n = 256;
    std::vector<double> xs(n), hs(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = lo + (hi - lo) * (i + 0.5) / n;
        hs[i] = customH_(xs[i]);
    }
    double prevH = -kInf;
    double prevSecant = kInf;
    double firstFinite = kInf, lastFinite = -kInf;
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(hs[i])) {
            if (hs[i] == kInf)
                throw PreconditionViolation("reward", "custom log reward must be finite or -inf");
            continue;
        }
        if (firstFinite == kInf) firstFinite = hs[i];
        lastFinite = hs[i];
        if (hs[i] < prevH - 1e-12 * std::max(1.0, std::abs(prevH)))
            throw PreconditionViolation("reward", "custom reward is not nondecreasing on the probe grid");
        prevH = hs[i];
    }
    for (int i = 0; i + 1 < n; ++i) {
        if (!std::isfinite(hs[i]) || !std::isfinite(hs[i + 1])) continue;
        const double secant = (hs[i + 1] - hs[i]) / (xs[i + 1] - xs[i]);
        if (secant > prevSecant + 1e-10 * std::max(1.0, std::abs(prevSecant)))
            throw PreconditionViolation("reward",
                                        "custom reward failed the concavity probe: log reward is not concave");
        prevSecant = secant;
        const double dl = customHL_(xs[i + 1]);
        const double dr = customHR_(xs[i]);
        if (std::isfinite(dl) && std::isfinite(dr) && xs[i + 1] > leftEdge_ && secant > dr + 1e-8 + 1e-8 * std::abs(dr))
            throw PreconditionViolation("reward", "custom slopes are inconsistent with h on the probe grid");
        if (std::isfinite(dl) && dl < beta_ - 1e-9)
            throw PreconditionViolation("reward", "custom left slope drops below the declared asymptotic slope");
    }
    if (!(lastFinite > firstFinite + 1e-12) && !std::isfinite(leftEdge_))
        throw PreconditionViolation("reward", "custom reward looks constant on the probe grid");
}

double RewardFunction::rawLogEval(double x) const {
    switch (kind_) {
    case RewardKind::PowerPlus:
        return x > 0.0 ? paramA_ * std::log(x) : -kInf;
    case RewardKind::ExpCall: {
        const double d = x - leftEdge_;
        return d > 0.0 ? x + std::log1p(-std::exp(-d)) : -kInf;
    }
    case RewardKind::ExpPut: {
        const double d = x - leftEdge_;
        return d > 0.0 ? std::log(paramA_) + std::log1p(-std::exp(-d)) : -kInf;
    }
    case RewardKind::Indicator:
        return x >= paramA_ ? 0.0 : -kInf;
    case RewardKind::ExpLinear:
        return paramA_ + paramB_ * x;
    case RewardKind::PiecewiseLogLinear: {
        if (x < leftEdge_) return -kInf;
        if (breakpoints_.empty()) return anchorH_ + slopes_[0] * (x - anchorX_);
        if (x <= breakpoints_.front()) return knotLog_.front() + slopes_.front() * (x - breakpoints_.front());
        if (x >= breakpoints_.back()) return knotLog_.back() + slopes_.back() * (x - breakpoints_.back());
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
        return knotLog_[i] + slopes_[i + 1] * (x - breakpoints_[i]);
    }
    case RewardKind::Custom:
        return x < leftEdge_ ? -kInf : customH_(x);
    }
    return -kInf;
}

double RewardFunction::rawLogDerivLeft(double x) const {
    switch (kind_) {
    case RewardKind::PowerPlus:
        return x > 0.0 ? paramA_ / x : kInf;
    case RewardKind::ExpCall: {
        const double d = x - leftEdge_;
        return d > 0.0 ? 1.0 / (-std::expm1(-d)) : kInf;
    }
    case RewardKind::ExpPut: {
        const double d = x - leftEdge_;
        return d > 0.0 ? 1.0 / std::expm1(d) : kInf;
    }
    case RewardKind::Indicator:
        return x > paramA_ ? 0.0 : kInf;
    case RewardKind::ExpLinear:
        return paramB_;
    case RewardKind::PiecewiseLogLinear: {
        if (breakpoints_.empty()) return slopes_[0];
        const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
        // piece left of breakpoints_[i] has slope slopes_[i]
        return slopes_[static_cast<std::size_t>(it - breakpoints_.begin())];
    }
    case RewardKind::Custom:
        return customHL_(x);
    }
    return kInf;
}

double RewardFunction::rawLogDerivRight(double x) const {
    switch (kind_) {
    case RewardKind::PowerPlus:
        return x > 0.0 ? paramA_ / x : kInf;
    case RewardKind::ExpCall: {
        const double d = x - leftEdge_;
        return d > 0.0 ? 1.0 / (-std::expm1(-d)) : kInf;
    }
    case RewardKind::ExpPut: {
        const double d = x - leftEdge_;
        return d > 0.0 ? 1.0 / std::expm1(d) : kInf;
    }
    case RewardKind::Indicator:
        return x >= paramA_ ? 0.0 : kInf;
    case RewardKind::ExpLinear:
        return paramB_;
    case RewardKind::PiecewiseLogLinear: {
        if (breakpoints_.empty()) return slopes_[0];
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
        return slopes_[static_cast<std::size_t>(it - breakpoints_.begin())];
    }
    case RewardKind::Custom:
        return customHR_(x);
    }
    return kInf;
}

double RewardFunction::logEval(double x) const {
    if (x < leftEdge_) return -kInf;
    const double xe = cap_ ? std::min(x, *cap_) : x;
    const double h = rawLogEval(xe);
    return h == -kInf ? -kInf : h + logScale_;
}

double RewardFunction::eval(double x) const {
    const double h = logEval(x);
    return h == -kInf ? 0.0 : std::exp(h);
}

double RewardFunction::logDerivLeft(double x) const {
    if (x <= leftEdge_) return kInf;
    if (logEval(x) == -kInf) return kInf;
    if (cap_ && x > *cap_) return 0.0;
    return rawLogDerivLeft(x);
}

double RewardFunction::logDerivRight(double x) const {
    if (x < leftEdge_) return kInf;
    if (logEval(x) == -kInf) return kInf;
    if (cap_ && x >= *cap_) return 0.0;
    return rawLogDerivRight(x);
}

double RewardFunction::derivLeft(double x) const {
    const double g = eval(x);
    if (g == 0.0) return 0.0;
    const double s = logDerivLeft(x);
    return std::isinf(s) ? kInf : s * g;
}

double RewardFunction::derivRight(double x) const {
    const double g = eval(x);
    if (g == 0.0) return 0.0;
    const double s = logDerivRight(x);
    return std::isinf(s) ? kInf : s * g;
}

double RewardFunction::supValue() const {
    const double s = supLogValue();
    return s == kInf ? kInf : std::exp(s);
}

std::optional<double> RewardFunction::constantTailEdge() const {
    if (cap_) {
        const double inner = constantEdge_ ? std::min(*constantEdge_, *cap_) : *cap_;
        return inner;
    }
    return constantEdge_;
}

RewardFunction RewardFunction::truncateAbove(double capAt) const {
    if (!std::isfinite(capAt))
        throw PreconditionViolation("reward", "truncation cap must be finite");
    if (capAt <= leftEdge_)
        throw InvalidTruncation("cap at or below the positivity edge would leave a constant reward");
    RewardFunction f = *this;
    f.cap_ = cap_ ? std::min(*cap_, capAt) : capAt;
    f.beta_ = 0.0;
    f.tailGap_ = TailSlopeGap::Attained;
    f.supLog_ = rawLogEval(std::min(f.cap_.value(), constantEdge_ ? *constantEdge_ : f.cap_.value()));
    return f;
}

RewardFunction RewardFunction::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor))
        throw PreconditionViolation("reward", "scale factor must be a positive real");
    RewardFunction f = *this;
    f.logScale_ += std::log(factor);
    return f;
}

RewardFunction RewardFunction::toPiecewise(std::span<const double> grid) const {
    std::vector<double> nodes;
    nodes.reserve(grid.size());
    for (double x : grid)
        if (logEval(x) > -kInf && (nodes.empty() || x > nodes.back())) nodes.push_back(x);
    if (nodes.size() < 2)
        throw PreconditionViolation("reward", "piecewise snapshot needs at least two grid points with g > 0");

    std::vector<double> slopes;
    slopes.reserve(nodes.size() + 1);
    const double firstLeft = logDerivLeft(nodes.front());
    std::vector<double> secants(nodes.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        secants[i] = (logEval(nodes[i + 1]) - logEval(nodes[i])) / (nodes[i + 1] - nodes[i]);
    slopes.push_back(std::isfinite(firstLeft) ? std::max(firstLeft, secants.front()) : secants.front());
    for (double s : secants) slopes.push_back(s);
    const double tail = cap_ ? 0.0 : beta_;
    slopes.push_back(std::min(tail, secants.back()));
    // snap floating point wobble so the constructor's ordering check passes
    for (std::size_t i = 1; i < slopes.size(); ++i)
        if (slopes[i] > slopes[i - 1]) slopes[i] = slopes[i - 1];
    for (auto& s : slopes) s = std::max(s, 0.0);

    std::optional<double> edge;
    if (std::isfinite(leftEdge_)) edge = leftEdge_;
    return piecewiseLogLinear(nodes, slopes, nodes.front(), logEval(nodes.front()), edge);
}

std::string RewardFunction::describe() const {
    std::ostringstream os;
    switch (kind_) {
    case RewardKind::PowerPlus: os << "PowerPlus(nu=" << paramA_ << ")"; break;
    case RewardKind::ExpCall: os << "ExpCall(K=" << paramA_ << ")"; break;
    case RewardKind::ExpPut: os << "ExpPut(K=" << paramA_ << ")"; break;
    case RewardKind::Indicator: os << "Indicator(a=" << paramA_ << ")"; break;
    case RewardKind::ExpLinear: os << "ExpLinear(c=" << paramA_ << ", slope=" << paramB_ << ")"; break;
    case RewardKind::PiecewiseLogLinear:
        os << "PiecewiseLogLinear(" << breakpoints_.size() << " breakpoints, beta=" << beta_ << ")";
        break;
    case RewardKind::Custom: os << "Custom(beta=" << beta_ << ")"; break;
    }
    if (cap_) os << " capped at " << *cap_;
    if (logScale_ != 0.0) os << " scaled by e^" << logScale_;
    return os.str();
}

} // namespace optstop
