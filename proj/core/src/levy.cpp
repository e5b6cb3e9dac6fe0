#include "optstop/levy.hpp"

#include "optstop/errors.hpp"
#include "optstop/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace optstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

LevyModel::LevyModel(double drift, double sigma, std::optional<LevyJumps> jumps)
    : drift_(drift), sigma_(sigma), jumps_(std::move(jumps)) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw PreconditionViolation("levy", "sigma must be a nonnegative real");
    if (!std::isfinite(drift)) throw PreconditionViolation("levy", "drift must be finite");
    if (jumps_) {
        if (!(jumps_->rate > 0.0))
            throw PreconditionViolation("levy", "jump rate must be positive (omit jumps for none)");
    }
    const bool canRise = sigma_ > 0.0 || drift_ > 0.0 || (jumps_ && jumps_->law.hasPositivePart());
    if (!canRise)
        throw DegenerateLaw("the process never enters (0, inf): P(X_1 > 0) = 0");
}

double LevyModel::meanPerUnitTime() const {
    return drift_ + (jumps_ ? jumps_->rate * jumps_->law.mean() : 0.0);
}

IncrementLaw stepLaw(const LevyModel& model, double dt) {
    if (!(dt > 0.0)) throw PreconditionViolation("levy", "time step must be positive");
    if (model.sigma() == 0.0 && !model.jumps()) {
        // deterministic drift: a one-atom lattice law
        return IncrementLaw::lattice(std::abs(model.drift()) * dt, {{model.drift() * dt, 1.0}});
    }
    std::optional<JumpLaw> jump;
    double rate = 0.0;
    if (model.jumps()) {
        jump = model.jumps()->law;
        rate = model.jumps()->rate * dt;
    }
    return IncrementLaw::jumpDiffusionStep(model.drift() * dt, model.sigma() * std::sqrt(dt), rate,
                                           jump);
}

Regularity regularityOfZero(const LevyModel& model) {
    return (model.sigma() > 0.0 || model.drift() > 0.0) ? Regularity::Regular : Regularity::Irregular;
}

ThresholdSequence thresholdSequence(const LevyModel& model, const RewardFunction& f, double q,
                                    int maxLevel, long perLevelBudget, const SolverOptions& base) {
    if (maxLevel < 2) throw PreconditionViolation("levy", "need at least levels 0..2");
    ThresholdSequence seq;
    seq.levels.reserve(static_cast<std::size_t>(maxLevel) + 1);

    for (int level = 0; level <= maxLevel; ++level) {
        const double dt = std::ldexp(1.0, -level);
        SolverOptions opts = base;
        opts.forceMonteCarlo = true;
        opts.computeNeverStopValue = false; // the sequence needs thresholds only
        opts.mc.budget = perLevelBudget;
        opts.mc.seed = Rng::deriveStream(base.mc.seed, 1000 + static_cast<std::uint64_t>(level));
        if (!base.bracket && std::isfinite(f.leftEdge()))
            opts.bracket = {{f.leftEdge() - 5.0, f.leftEdge() + 5.0}};
        if (model.sigma() == 0.0 && model.jumps()) {
            const LevyModel* m = &model;
            const double qq = q;
            const int lvl = level;
            opts.kernelFactory = [m, qq, lvl](const McOptions& mc) {
                return dyadicReturnKernel(*m, qq, lvl, mc);
            };
        }
        const IncrementLaw law = stepLaw(model, dt);
        const ThresholdSolution sol = findThreshold(law, f, q * dt, opts);

        ThresholdSequenceLevel entry;
        entry.level = level;
        entry.regime = sol.regime;
        entry.tolerance = sol.uTolerance;
        switch (sol.regime) {
        case Regime::Finite: entry.u = sol.u; break;
        case Regime::NeverStop: entry.u = kInf; break;
        case Regime::StopEverywhere: entry.u = -kInf; break;
        case Regime::Inconclusive:
            throw Unsupported("levy", "level " + std::to_string(level) +
                                          " came back inconclusive: " + sol.inconclusiveReason);
        }
        if (!seq.levels.empty()) {
            const auto& prev = seq.levels.back();
            const double slack = 4.0 * (prev.tolerance + entry.tolerance) + 1e-12;
            if (entry.u < prev.u - slack) {
                std::ostringstream os;
                os.precision(10);
                os << "u(" << level << ") = " << entry.u << " fell below u(" << prev.level
                   << ") = " << prev.u << " beyond " << slack;
                throw MonotonicityViolated(os.str());
            }
        }
        seq.levels.push_back(entry);
    }

    // advisory geometric-gap extrapolation on the last three finite levels
    std::vector<double> finite;
    for (const auto& l : seq.levels)
        if (std::isfinite(l.u)) finite.push_back(l.u);
    if (finite.empty()) {
        seq.infinite = true;
        seq.extrapolated = kInf;
        return seq;
    }
    seq.extrapolated = finite.back();
    if (finite.size() >= 3) {
        const double d1 = finite[finite.size() - 1] - finite[finite.size() - 2];
        const double d0 = finite[finite.size() - 2] - finite[finite.size() - 3];
        if (d0 != 0.0) {
            const double r = d1 / d0;
            if (r > 0.0 && r < 0.95) seq.extrapolated = finite.back() + d1 * r / (1.0 - r);
        }
    }
    return seq;
}

// ---------------------------------------------------------------------------
// Dyadic threshold-rule value

namespace {

struct PathAccum {
    double sum = 0.0;
    double sumSq = 0.0;
    double trunc = 0.0;
    long n = 0;
};

struct DyadicStop {
    bool stopped = false;
    double time = 0.0;     // grid time of the stop
    double position = 0.0; // path position at that grid time
};

// Dyadic crossing of a drift-plus-jumps path (sigma = 0) resolved jump by
// jump: between jumps the path moves deterministically, so at most one grid
// point per inter-jump segment needs checking (the first one when the drift
// is nonpositive, the first one past the crossing point when it is positive).
DyadicStop simulateDriftJumpCrossing(const LevyModel& model, double q, double dt, double threshold,
                                     double x, double alpha, double logG, double logAbandon,
                                     double maxTime, Rng& rng, double& trunc) {
    const double drift = model.drift();
    const double rate = model.jumps() ? model.jumps()->rate : 0.0;
    double pos = x; // position just after the event at tCur
    double tCur = 0.0;
    for (;;) {
        const double tJump = rate > 0.0 ? tCur + rng.exponential(rate) : kInf;
        // earliest grid time in (tCur, tJump] at which the segment sits at or
        // above the threshold; with nonpositive drift only the first grid
        // point after tCur can qualify
        double tg = kInf;
        if (drift > 0.0) {
            const double tCross = pos >= threshold ? tCur : tCur + (threshold - pos) / drift;
            tg = dt * std::ceil(tCross / dt);
            if (tg <= tCur) tg = dt * (std::floor(tCur / dt) + 1.0);
        } else if (pos >= threshold) {
            tg = dt * (std::floor(tCur / dt) + 1.0);
            if (!(pos + drift * (tg - tCur) >= threshold)) tg = kInf;
        }
        if (tg <= tJump) return {true, tg, pos + drift * (tg - tCur)};
        if (tJump == kInf) return {};
        pos += drift * (tJump - tCur) + model.jumps()->law.draw(rng);
        tCur = tJump;
        const double logBound = -q * tCur - alpha * std::max(threshold - pos, 0.0) + logG;
        if (logBound < logAbandon || tCur > maxTime) {
            trunc += std::exp(logBound);
            return {};
        }
    }
}

} // namespace

Estimate valueAtLevel(const LevyModel& model, const RewardFunction& f, double q, int level,
                      double threshold, double x, const McOptions& opts) {
    if (level < 0) throw PreconditionViolation("levy", "level must be nonnegative");
    if (x >= threshold) return {f.eval(x), 0.0};
    const double dt = std::ldexp(1.0, -level);

    if (model.sigma() > 0.0) {
        // per-step exact sampling
        const IncrementLaw law = stepLaw(model, dt);
        const PassageEstimate pe =
            firstPassageMC(law, f, q * dt, threshold, x, PassageKind::Entry, opts);
        return {pe.value, pe.se};
    }

    // sigma = 0: event-driven simulation of the same dyadic rule
    if (q == 0.0 && !(model.meanPerUnitTime() < 0.0) && !opts.allowZeroDiscountNonNegativeDrift)
        throw PreconditionViolation(
            "levy", "zero discount without certified negative drift: classify the regime first");

    const IncrementLaw unit = stepLaw(model, 1.0);
    const double alpha = unit.mgfRoot(q).value_or(0.0);
    double logG;
    if (std::isfinite(f.supLogValue()))
        logG = f.supLogValue();
    else if (model.jumps() && std::isfinite(model.jumps()->law.supSupport()))
        logG = f.logEval(threshold + std::max(model.jumps()->law.supSupport(), 0.0));
    else
        logG = f.logEval(threshold + 10.0);
    if (logG == -kInf) logG = 0.0;
    const double logAbandon = std::log(opts.abandonThreshold);
    const double maxTime = static_cast<double>(opts.maxSteps) * dt;

    const long nBatches = (opts.budget + opts.batchSize - 1) / opts.batchSize;
    std::vector<PathAccum> acc(static_cast<std::size_t>(nBatches));
    parallelFor(static_cast<std::size_t>(nBatches), opts.threads, [&](std::size_t b) {
        Rng rng(Rng::deriveStream(opts.seed, b));
        const long lo = static_cast<long>(b) * opts.batchSize;
        const long count = std::min(opts.batchSize, opts.budget - lo);
        PathAccum& slot = acc[b];
        for (long i = 0; i < count; ++i) {
            const DyadicStop stop = simulateDriftJumpCrossing(model, q, dt, threshold, x, alpha,
                                                              logG, logAbandon, maxTime, rng,
                                                              slot.trunc);
            const double v = stop.stopped ? std::exp(-q * stop.time + f.logEval(stop.position)) : 0.0;
            slot.sum += v;
            slot.sumSq += v * v;
            ++slot.n;
        }
    });

    double sum = 0.0, sumSq = 0.0, trunc = 0.0;
    long n = 0;
    for (const auto& a : acc) {
        sum += a.sum;
        sumSq += a.sumSq;
        trunc += a.trunc;
        n += a.n;
    }
    Estimate e;
    e.value = sum / static_cast<double>(n);
    if (n > 1) {
        const double var = std::max(0.0, (sumSq - sum * sum / n) / static_cast<double>(n - 1));
        e.se = std::sqrt(var / static_cast<double>(n));
    } else {
        e.se = kInf;
    }
    const double truncMean = trunc / static_cast<double>(n);
    if (truncMean > 0.1 * e.value + 1e-10 * std::max(1.0, std::exp(logG)))
        throw TruncationDominates("abandoned paths may carry more than 10% of the estimate");
    return e;
}

ReturnKernel dyadicReturnKernel(const LevyModel& model, double q, int level, const McOptions& opts) {
    if (model.sigma() != 0.0)
        throw PreconditionViolation("levy", "event-driven kernels apply to sigma = 0 models");
    if (q == 0.0 && !(model.meanPerUnitTime() < 0.0) && !opts.allowZeroDiscountNonNegativeDrift)
        throw PreconditionViolation(
            "levy", "zero discount without certified negative drift: classify the regime first");
    const double dt = std::ldexp(1.0, -level);
    const IncrementLaw unit = stepLaw(model, 1.0);
    const double alpha = unit.mgfRoot(q).value_or(0.0);
    const double logAbandon = std::log(opts.abandonThreshold);
    const double maxTime = static_cast<double>(opts.maxSteps) * dt;

    ReturnKernel kernel;
    kernel.budget = opts.budget;
    kernel.weight.assign(static_cast<std::size_t>(opts.budget), 0.0);
    kernel.overshoot.assign(static_cast<std::size_t>(opts.budget), 0.0);
    const long nBatches = (opts.budget + opts.batchSize - 1) / opts.batchSize;
    std::vector<double> truncs(static_cast<std::size_t>(nBatches), 0.0);
    parallelFor(static_cast<std::size_t>(nBatches), opts.threads, [&](std::size_t b) {
        Rng rng(Rng::deriveStream(opts.seed, b));
        const long lo = static_cast<long>(b) * opts.batchSize;
        const long count = std::min(opts.batchSize, opts.budget - lo);
        for (long i = 0; i < count; ++i) {
            const DyadicStop stop = simulateDriftJumpCrossing(model, q, dt, 0.0, 0.0, alpha, 0.0,
                                                              logAbandon, maxTime, rng, truncs[b]);
            if (stop.stopped) {
                kernel.weight[static_cast<std::size_t>(lo + i)] = std::exp(-q * stop.time);
                kernel.overshoot[static_cast<std::size_t>(lo + i)] = stop.position;
            }
        }
    });
    for (double t : truncs) kernel.truncationBound += t;
    kernel.truncationBound /= static_cast<double>(opts.budget);
    return kernel;
}

} // namespace optstop
