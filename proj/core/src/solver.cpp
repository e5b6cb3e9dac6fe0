#include "optstop/solver.hpp"

#include "optstop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace optstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Acklam's rational approximation of the standard normal quantile.
double normalQuantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                               1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                               6.680131188771972e+01,  -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                               -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                               3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double t = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
               ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    }
    if (p > 1.0 - plow) return -normalQuantile(1.0 - p);
    const double t = p - 0.5;
    const double r = t * t;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * t /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

struct KernelHandle {
    ReturnKernel kernel;
    bool exact = false;
    long budget = 0;
    int doublingsLeft = 0;
};

KernelHandle makeKernel(const IncrementLaw& law, double q, const SolverOptions& opts) {
    KernelHandle h;
    h.exact = law.isLattice() && !opts.forceMonteCarlo && !opts.kernelFactory;
    if (h.exact) {
        h.kernel = exactReturnKernel(law, q);
    } else {
        h.kernel = opts.kernelFactory ? opts.kernelFactory(opts.mc) : mcReturnKernel(law, q, opts.mc);
        h.budget = opts.mc.budget;
        h.doublingsLeft = opts.maxBudgetDoublings;
    }
    return h;
}

// Doubling replays the existing batch streams and appends fresh ones, so
// every previous sample is reproduced and comparisons stay coherent.
bool growKernel(KernelHandle& h, const IncrementLaw& law, double q, const SolverOptions& opts) {
    if (h.exact || h.doublingsLeft <= 0) return false;
    --h.doublingsLeft;
    McOptions grown = opts.mc;
    h.budget *= 2;
    grown.budget = h.budget;
    h.kernel = opts.kernelFactory ? opts.kernelFactory(grown) : mcReturnKernel(law, q, grown);
    return true;
}

enum class Cmp { Greater, Leq, Ambiguous };

class RatioOracle {
public:
    RatioOracle(const IncrementLaw& law, const RewardFunction& f, double q, const SolverOptions& opts,
                std::vector<RatioPoint>& trace)
        : law_(law), f_(f), q_(q), opts_(opts), trace_(trace),
          handle_(makeKernel(law, q, opts)), z_(normalQuantile(0.5 + 0.5 * opts.confidence)) {}

    Estimate ratio(double x) {
        const Estimate e = ratioFromKernel(handle_.kernel, f_, x);
        trace_.push_back({x, e.value, e.se});
        return e;
    }

    Cmp compare(double x) {
        for (;;) {
            const Estimate e = ratio(x);
            if (std::isinf(e.value)) return Cmp::Greater;
            if (handle_.exact) {
                const double tieTol = 1e-12 * std::max(1.0, std::abs(e.value));
                return e.value > 1.0 + tieTol ? Cmp::Greater : Cmp::Leq;
            }
            if (e.value - z_ * e.se > 1.0) return Cmp::Greater;
            if (e.value + z_ * e.se <= 1.0) return Cmp::Leq;
            if (!growKernel(handle_, law_, q_, opts_)) return Cmp::Ambiguous;
        }
    }

    bool exact() const { return handle_.exact; }

private:
    const IncrementLaw& law_;
    const RewardFunction& f_;
    double q_;
    const SolverOptions& opts_;
    std::vector<RatioPoint>& trace_;
    KernelHandle handle_;
    double z_;
};

std::vector<double> defaultLevelSchedule(const RewardFunction& f, const SolverOptions& opts) {
    if (!opts.levelSchedule.empty()) return opts.levelSchedule;
    const double base = std::isfinite(f.leftEdge()) ? f.leftEdge() : 0.0;
    return {base + 10.0, base + 20.0, base + 40.0, base + 80.0};
}

Estimate passageValue(const IncrementLaw& law, const RewardFunction& f, double q, double level,
                      double start, const SolverOptions& opts) {
    if (start >= level) return {f.eval(start), 0.0};
    if (law.isLattice() && !opts.forceMonteCarlo) {
        try {
            return {firstPassageExact(law, f, q, level, start, PassageKind::Entry), 0.0};
        } catch (const UnboundedExpectation&) {
            // fall through to simulation with the zero-discount override
        }
    }
    McOptions mc = opts.mc;
    mc.allowZeroDiscountNonNegativeDrift = true;
    const PassageEstimate pe = firstPassageMC(law, f, q, level, start, PassageKind::Entry, mc);
    return {pe.value, pe.se};
}

NeverStopResult neverStopIterates(const IncrementLaw& law, const RewardFunction& f, double q,
                                  std::span<const double> levels, const SolverOptions& opts) {
    if (levels.size() < 3)
        throw PreconditionViolation("solver", "level schedule needs at least three levels");
    NeverStopResult r;
    r.beta = f.asymptoticSlope();
    double prev = -kInf;
    for (const double y : levels) {
        if (!(y > prev))
            throw PreconditionViolation("solver", "level schedule must be strictly increasing");
        prev = y;
        const Estimate e = passageValue(law, f, q, y, 0.0, opts);
        r.iterates.push_back(e.value);
        r.iterateErrors.push_back(e.se);
        if (e.value > 1e100) break; // already blown past any cap
    }
    const auto n = r.iterates.size();
    const double last = r.iterates.back();
    if (last > 1e100) {
        r.diverged = true;
        r.w = kInf;
        return r;
    }
    const double d1 = r.iterates[n - 1] - r.iterates[n - 2];
    const double d0 = r.iterates[n - 2] - r.iterates[n - 3];
    const double scale = std::max(1.0, std::abs(last));
    const double tol = opts.levelTolerance * scale +
                       2.0 * (r.iterateErrors[n - 1] + r.iterateErrors[n - 2]);
    if (std::abs(d1) <= tol) {
        // converged; one Aitken step sharpens the limit when the gaps shrink geometrically
        r.w = last;
        const double denom = d0 - d1;
        if (std::abs(denom) > 1e-300 && d0 != 0.0 && std::abs(d1 / d0) < 0.95)
            r.w = last + d1 * d1 / denom;
        return r;
    }
    if (d1 > 0.0 && d1 >= 0.5 * d0) {
        r.diverged = true; // increments keep their size: the supremum is infinite
        r.w = kInf;
        return r;
    }
    throw ScheduleTooShort("level iterates neither settled nor certified divergence; extend the schedule");
}

ThresholdSolution findThresholdImpl(const IncrementLaw& law, const RewardFunction& f, double q,
                                    const SolverOptions& opts, FinitenessVerdict verdict) {
    ThresholdSolution sol;
    sol.classification = verdict;
    sol.beta = f.asymptoticSlope();
    sol.method = (law.isLattice() && !opts.forceMonteCarlo) ? SolveMethod::ExactLattice
                                                            : SolveMethod::MonteCarlo;

    if (verdict.verdict == Finiteness::Infinite) {
        sol.regime = Regime::NeverStop;
        if (opts.computeNeverStopValue) {
            const auto schedule = defaultLevelSchedule(f, opts);
            const NeverStopResult ns = neverStopIterates(law, f, q, schedule, opts);
            sol.w = ns.w;
            sol.wDiverged = ns.diverged;
            sol.levelIterates = ns.iterates;
        }
        return sol;
    }

    const double x0 = f.leftEdge();
    const double scale = law.isLattice() ? law.step() : 1.0;
    double lo, hi;
    if (opts.bracket) {
        lo = opts.bracket->first;
        hi = opts.bracket->second;
        if (!(lo < hi)) throw PreconditionViolation("solver", "bracket must satisfy lo < hi");
    } else if (std::isfinite(x0)) {
        lo = x0 + std::max(opts.tol, 1e-9);
        hi = x0 + 100.0;
    } else {
        lo = -100.0;
        hi = 100.0;
    }
    if (verdict.thresholdUpperBound) hi = std::min(hi, *verdict.thresholdUpperBound + scale);
    if (!(lo < hi)) lo = hi - 100.0;

    RatioOracle oracle(law, f, q, opts, sol.ratioTrace);
    const double ceiling = (std::isfinite(x0) ? x0 : 0.0) + 1e6 * scale;
    const double floor = std::isfinite(x0) ? x0 - scale : -1e6 * scale;

    // right bracket: rho(hi) <= 1
    double span = hi - lo;
    for (;;) {
        const Cmp c = oracle.compare(hi);
        if (c != Cmp::Greater) break;
        lo = hi;
        hi += span;
        span *= 2.0;
        if (hi > ceiling) {
            sol.regime = Regime::Inconclusive;
            sol.inconclusiveReason =
                "ratio stayed above 1 up to the ceiling and no infinite-threshold certificate applies";
            return sol;
        }
    }

    // left bracket: rho(lo) > 1
    span = std::max(hi - lo, scale);
    bool haveLeft = false;
    for (;;) {
        const bool atFloor = lo <= floor;
        if (atFloor) lo = floor;
        const Cmp c = oracle.compare(lo);
        if (c == Cmp::Greater) {
            haveLeft = true;
            break;
        }
        hi = lo;
        if (atFloor) break;
        lo = std::max(lo - span, floor);
        span *= 2.0;
    }
    if (!haveLeft) {
        if (stopEverywhereCertificate(law, f, q, floor)) {
            sol.regime = Regime::StopEverywhere;
            sol.u = -kInf;
            return sol;
        }
        sol.regime = Regime::Inconclusive;
        sol.inconclusiveReason =
            "ratio stayed at or below 1 down to the floor without a stop-everywhere certificate";
        return sol;
    }

    while (hi - lo > opts.tol) {
        const double mid = 0.5 * (lo + hi);
        const Cmp c = oracle.compare(mid);
        if (c == Cmp::Ambiguous) {
            // the comparison cannot be resolved at the budget cap: accept the
            // point and carry the bracket width as the tolerance
            sol.regime = Regime::Finite;
            sol.u = std::isfinite(x0) ? std::max(mid, x0) : mid;
            sol.uTolerance = hi - lo;
            return sol;
        }
        (c == Cmp::Greater ? lo : hi) = mid;
    }
    sol.regime = Regime::Finite;
    const double mid = 0.5 * (lo + hi);
    sol.u = std::isfinite(x0) ? std::max(mid, x0) : mid;
    sol.uTolerance = std::max(opts.tol, hi - lo);
    return sol;
}

} // namespace

Estimate oneStepRatio(const IncrementLaw& law, const RewardFunction& f, double q, double x,
                      const SolverOptions& opts) {
    std::vector<RatioPoint> trace;
    RatioOracle oracle(law, f, q, opts, trace);
    return oracle.ratio(x);
}

ThresholdSolution findThreshold(const IncrementLaw& law, const RewardFunction& f, double q,
                                const SolverOptions& opts) {
    return findThresholdImpl(law, f, q, opts, lightTailCharacterization(law, f, q));
}

Estimate valueWithThreshold(const IncrementLaw& law, const RewardFunction& f, double q,
                            double threshold, double x, const SolverOptions& opts) {
    if (threshold == -kInf || x >= threshold) return {f.eval(x), 0.0};
    return passageValue(law, f, q, threshold, x, opts);
}

std::vector<Estimate> valueProfileWithThreshold(const IncrementLaw& law, const RewardFunction& f,
                                                double q, double threshold,
                                                std::span<const double> xs,
                                                const SolverOptions& opts) {
    std::vector<Estimate> out(xs.size());
    if (threshold == -kInf) {
        for (std::size_t i = 0; i < xs.size(); ++i) out[i] = {f.eval(xs[i]), 0.0};
        return out;
    }
    if (law.isLattice() && !opts.forceMonteCarlo) {
        // one factorized solve per lattice coset of the starts
        const double h = law.step();
        std::vector<char> done(xs.size(), 0);
        try {
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (done[i]) continue;
                std::vector<double> group;
                std::vector<std::size_t> idx;
                for (std::size_t j = i; j < xs.size(); ++j) {
                    if (done[j]) continue;
                    const double r = (xs[j] - xs[i]) / h;
                    if (std::abs(r - std::round(r)) <= 1e-9) {
                        group.push_back(xs[j]);
                        idx.push_back(j);
                        done[j] = 1;
                    }
                }
                const auto values = firstPassageExactBatch(law, f, q, threshold, group);
                for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = {values[k], 0.0};
            }
            return out;
        } catch (const UnboundedExpectation&) {
            // per-point simulation below
        }
    }
    for (std::size_t i = 0; i < xs.size(); ++i)
        out[i] = valueWithThreshold(law, f, q, threshold, xs[i], opts);
    return out;
}

NeverStopResult neverStopValue(const IncrementLaw& law, const RewardFunction& f, double q,
                               std::span<const double> levels, const SolverOptions& opts) {
    const FinitenessVerdict verdict = lightTailCharacterization(law, f, q);
    if (verdict.verdict == Finiteness::Finite)
        throw PreconditionViolation("solver",
                                    "never-stop value requested on an instance classified Finite");
    std::vector<double> schedule(levels.begin(), levels.end());
    if (schedule.empty()) schedule = defaultLevelSchedule(f, opts);
    return neverStopIterates(law, f, q, schedule, opts);
}

// ---------------------------------------------------------------------------
// Value accessor

struct ValueFunction::Impl {
    Impl(IncrementLaw l, RewardFunction r) : law(std::move(l)), reward(std::move(r)) {}

    IncrementLaw law;
    RewardFunction reward;
    double q = 0.0;
    Regime regime = Regime::Inconclusive;
    double u = kNaN;
    double w = kNaN;
    double beta = 0.0;
    std::string reason;
    SolverOptions opts;
};

Estimate ValueFunction::estimate(double x) const {
    const Impl& s = *impl_;
    switch (s.regime) {
    case Regime::StopEverywhere:
        return {s.reward.eval(x), 0.0};
    case Regime::Finite: {
        if (x >= s.u) return {s.reward.eval(x), 0.0};
        Estimate e = passageValue(s.law, s.reward, s.q, s.u, x, s.opts);
        e.value = std::max(e.value, s.reward.eval(x));
        return e;
    }
    case Regime::NeverStop: {
        if (std::isinf(s.w)) return {kInf, 0.0};
        return {std::exp(s.beta * x) * s.w, 0.0};
    }
    case Regime::Inconclusive:
        throw PreconditionViolation("solver", "no value accessor: " + s.reason);
    }
    return {kNaN, 0.0};
}

std::vector<Estimate> ValueFunction::profile(std::span<const double> xs) const {
    const Impl& s = *impl_;
    if (s.regime == Regime::Finite) {
        auto out = valueProfileWithThreshold(s.law, s.reward, s.q, s.u, xs, s.opts);
        for (std::size_t i = 0; i < xs.size(); ++i)
            out[i].value = std::max(out[i].value, s.reward.eval(xs[i]));
        return out;
    }
    std::vector<Estimate> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = estimate(xs[i]);
    return out;
}

Solution solve(const IncrementLaw& law, const RewardFunction& f, double q,
               const SolverOptions& opts) {
    Solution out;
    const FinitenessVerdict verdict = lightTailCharacterization(law, f, q);
    try {
        out.threshold = findThresholdImpl(law, f, q, opts, verdict);
    } catch (const Error& e) {
        out.threshold.regime = Regime::Inconclusive;
        out.threshold.classification = verdict;
        out.threshold.inconclusiveReason = std::string(e.module()) + ": " + e.what();
    }

    auto impl = std::shared_ptr<ValueFunction::Impl>(new ValueFunction::Impl(law, f));
    impl->q = q;
    impl->regime = out.threshold.regime;
    impl->u = out.threshold.u;
    impl->w = out.threshold.w;
    impl->beta = out.threshold.beta;
    impl->reason = out.threshold.inconclusiveReason;
    impl->opts = opts;
    out.value.impl_ = std::move(impl);

    // a threshold resting on a positivity jump can leave the value
    // discontinuous there; report the left limit separately
    if (out.threshold.regime == Regime::Finite && std::isfinite(f.leftEdge()) &&
        std::abs(out.threshold.u - f.leftEdge()) <= out.threshold.uTolerance + 1e-12 &&
        f.eval(f.leftEdge()) > 0.0) {
        const double step = law.isLattice() ? law.step() : 1.0;
        const double probe = out.threshold.u - std::max(1e-3 * step, 10.0 * out.threshold.uTolerance);
        try {
            out.leftValueAtThreshold = passageValue(law, f, q, out.threshold.u, probe, opts).value;
        } catch (const Error&) {
            // diagnostic only
        }
    }
    return out;
}

} // namespace optstop
