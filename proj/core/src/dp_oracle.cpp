#include "optstop/dp_oracle.hpp"

#include "optstop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace optstop {

DpResult valueIteration(const IncrementLaw& law, const RewardFunction& f, double q,
                        double lo, double hi, const DpOptions& opts) {
    if (!law.isLattice())
        throw PreconditionViolation("oracle", "value iteration runs on lattice laws only");
    if (!(lo < hi)) throw PreconditionViolation("oracle", "grid needs lo < hi");
    if (q == 0.0 && !(law.mean() < 0.0))
        throw OracleRefusal("zero discount without negative drift: value iteration may not converge");

    const double h = law.step();
    const std::int64_t kmin = law.minStepCount();
    const std::int64_t kmax = law.maxStepCount();
    const double jumpRange = static_cast<double>(kmax - kmin) * h;
    if (hi - lo < 20.0 * jumpRange)
        throw PreconditionViolation("oracle", "grid must cover at least 20 jump ranges");

    const auto jLo = static_cast<std::int64_t>(std::floor(lo / h + 1e-9));
    const auto jHi = static_cast<std::int64_t>(std::ceil(hi / h - 1e-9));
    const std::size_t n = static_cast<std::size_t>(jHi - jLo + 1);
    const std::size_t padded = n + static_cast<std::size_t>(kmax);

    DpResult dp;
    dp.step = h;
    dp.grid.resize(n);
    std::vector<double> g(padded);
    for (std::size_t i = 0; i < padded; ++i) {
        const double x = static_cast<double>(jLo + static_cast<std::int64_t>(i)) * h;
        if (i < n) dp.grid[i] = x;
        g[i] = f.eval(x);
    }

    std::vector<double> cur(g), next(padded);
    // states above the grid stay pinned to the reward
    const double d = std::exp(-q);
    const double loPos = dp.grid.front();
    double residual = std::numeric_limits<double>::infinity();
    int iter = 0;
    for (; iter < opts.maxIterations && residual > opts.tol; ++iter) {
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double cont = 0.0;
            for (const auto& a : law.atoms()) {
                const std::int64_t t = static_cast<std::int64_t>(i) + a.k;
                double vt;
                if (t >= 0) {
                    vt = cur[static_cast<std::size_t>(t)];
                } else {
                    const double x = loPos + static_cast<double>(t) * h;
                    vt = opts.boundary == DpBoundary::ClampToReward
                             ? f.eval(x)
                             : cur[0] * std::exp(opts.extrapolationRate * (x - loPos));
                }
                cont += a.p * vt;
            }
            const double v = std::max(g[i], d * cont);
            const double delta = std::abs(v - cur[i]) / std::max(1.0, std::abs(v));
            residual = std::max(residual, delta);
            next[i] = v;
        }
        std::copy(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(n), cur.begin());
    }

    dp.iterations = iter;
    dp.residual = residual;
    dp.hitIterationCap = residual > opts.tol;
    dp.values.assign(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(n));
    dp.stopping.resize(n);
    // stopping is only meaningful where the reward is positive; where g
    // vanishes (or nearly underflows) the true value still exceeds it, so
    // the absolute slack tapers off with g
    for (std::size_t i = 0; i < n; ++i) {
        const double slack =
            opts.stopRelTol * g[i] + opts.stopAbsTol * std::min(1.0, 1e4 * g[i]);
        dp.stopping[i] = g[i] > 0.0 && dp.values[i] <= g[i] + slack ? 1 : 0;
    }

    if (opts.expectInteriorThreshold && !dp.stopping.empty() && dp.stopping.front())
        throw GridTooNarrow("stopping set touches the lower grid edge; widen the grid downward");
    return dp;
}

OneSidedCheck checkOneSided(const DpResult& dp) {
    OneSidedCheck c;
    std::size_t first = dp.stopping.size();
    for (std::size_t i = 0; i < dp.stopping.size(); ++i) {
        if (dp.stopping[i]) {
            first = i;
            break;
        }
    }
    if (first == dp.stopping.size()) return c; // nothing stopped inside the grid
    for (std::size_t i = first; i < dp.stopping.size(); ++i)
        if (!dp.stopping[i]) return c; // a hole: not an up-set
    c.isUpSet = true;
    c.threshold = dp.grid[first];
    return c;
}

CrossValidation crossValidate(const Solution& solution, const DpResult& dp, double gridStep,
                              double seAllowance) {
    CrossValidation cv;
    const auto& thr = solution.threshold;
    if (thr.regime != Regime::Finite && thr.regime != Regime::StopEverywhere) {
        cv.note = "cross-validation applies to finite-threshold or stop-everywhere solutions";
        return cv;
    }

    const OneSidedCheck oneSided = checkOneSided(dp);
    if (thr.regime == Regime::StopEverywhere) {
        cv.thresholdOk = oneSided.isUpSet && oneSided.threshold == dp.grid.front();
        cv.thresholdGap = 0.0;
    } else if (!oneSided.isUpSet) {
        cv.thresholdOk = false;
        cv.note = "oracle stopping set is not an up-set";
    } else {
        cv.thresholdGap = std::abs(oneSided.threshold - thr.u);
        cv.thresholdOk = cv.thresholdGap <= gridStep + thr.uTolerance + 1e-9;
    }

    const auto values = solution.value.profile(dp.grid);
    cv.valuesOk = true;
    for (std::size_t i = 0; i < dp.grid.size(); ++i) {
        const double gap = std::abs(values[i].value - dp.values[i]);
        const double allow = std::max(1e-6 * std::max(1.0, std::abs(dp.values[i])),
                                      4.0 * (values[i].se + seAllowance));
        if (gap > cv.worstValueGap) {
            cv.worstValueGap = gap;
            cv.worstX = dp.grid[i];
        }
        if (gap > allow) cv.valuesOk = false;
    }
    cv.pass = cv.thresholdOk && cv.valuesOk;
    if (!cv.pass && cv.note.empty()) {
        std::ostringstream os;
        os.precision(10);
        os << "threshold gap " << cv.thresholdGap << ", worst value gap " << cv.worstValueGap
           << " at x = " << cv.worstX;
        cv.note = os.str();
    }
    return cv;
}

} // namespace optstop
