#include "optstop/first_passage.hpp"

#include "optstop/errors.hpp"
#include "optstop/parallel.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace optstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t levelIndex(double level, double origin, double h) {
    return static_cast<std::int64_t>(std::ceil((level - origin) / h - 1e-9));
}

// Decay exponent per lattice unit bounding the value contribution of states
// d units below the level: contribution <= G * exp(-decay * d).
double truncationDecayPerUnit(const IncrementLaw& law, double q) {
    const double h = law.step();
    const auto kmax = static_cast<double>(law.maxStepCount());
    double decay = 0.0;
    if (q > 0.0) decay = std::max(decay, q / kmax);
    if (const auto alpha = law.mgfRoot(q)) decay = std::max(decay, *alpha * h);
    if (q == 0.0 && law.mean() > 0.0 && law.minStepCount() < 0) {
        std::vector<std::pair<double, double>> reflected;
        for (const auto& a : law.atoms())
            reflected.emplace_back(-static_cast<double>(a.k) * h, a.p);
        const auto theta = IncrementLaw::lattice(h, reflected).mgfRoot(0.0);
        if (theta) decay = std::max(decay, *theta * h);
    }
    return decay;
}

std::int64_t chooseDepth(const IncrementLaw& law, double q, double G) {
    if (law.minStepCount() >= 0) return 1; // the walk never descends
    const double decay = truncationDecayPerUnit(law, q);
    if (!(decay > 0.0))
        throw UnboundedExpectation(
            "no geometric truncation bound at zero discount without drift; classify the regime first");
    const double absTol = 1e-13 * std::max(1.0, G);
    const double target = std::log(std::max(G, 1e-300) / absTol);
    const double depth = std::ceil(std::max(target, 0.0) / decay) + 2.0 - static_cast<double>(law.minStepCount());
    if (depth > 4e6)
        throw UnboundedExpectation("first-passage system too large; the instance is nearly critical");
    return static_cast<std::int64_t>(depth);
}

// Absorbing-chain factorization for transient states j in [jFloor, jLevel),
// positions origin + j h, absorption at j >= jLevel. States below jFloor are
// cut to zero; jFloor is chosen so the cut is below the solve tolerance.
class LatticeSolver {
public:
    LatticeSolver(const IncrementLaw& law, double q, std::int64_t jFloor, std::int64_t jLevel)
        : law_(law), jFloor_(jFloor), jLevel_(jLevel), discount_(std::exp(-q)) {
        const auto n = static_cast<Eigen::Index>(jLevel - jFloor);
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(n) * (law.atoms().size() + 1));
        for (std::int64_t j = jFloor; j < jLevel; ++j) {
            const auto row = static_cast<Eigen::Index>(j - jFloor);
            trips.emplace_back(row, row, 1.0);
            for (const auto& a : law.atoms()) {
                const std::int64_t t = j + a.k;
                if (t >= jLevel || t < jFloor) continue;
                trips.emplace_back(row, static_cast<Eigen::Index>(t - jFloor), -discount_ * a.p);
            }
        }
        Eigen::SparseMatrix<double> A(n, n);
        A.setFromTriplets(trips.begin(), trips.end());
        A.makeCompressed();
        lu_.compute(A);
        if (lu_.info() != Eigen::Success)
            throw UnboundedExpectation("first-passage system is singular");
    }

    // rhs(j) = discount * sum over absorbing one-step targets of p_k * reward(j + k)
    Eigen::VectorXd solveForReward(const RewardFunction& f, double origin) const {
        const auto n = static_cast<Eigen::Index>(jLevel_ - jFloor_);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        for (std::int64_t j = jFloor_; j < jLevel_; ++j) {
            double s = 0.0;
            for (const auto& a : law_.atoms()) {
                const std::int64_t t = j + a.k;
                if (t >= jLevel_) s += a.p * f.eval(origin + static_cast<double>(t) * law_.step());
            }
            rhs[static_cast<Eigen::Index>(j - jFloor_)] = discount_ * s;
        }
        return lu_.solve(rhs);
    }

    // Column per absorption target o in [jLevel, jLevel + kmax): probability-
    // discounted mass of landing exactly on o.
    Eigen::MatrixXd solveForTargets() const {
        const auto n = static_cast<Eigen::Index>(jLevel_ - jFloor_);
        const auto kmax = law_.maxStepCount();
        const auto nTargets = static_cast<Eigen::Index>(kmax);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, nTargets);
        for (std::int64_t j = jFloor_; j < jLevel_; ++j)
            for (const auto& a : law_.atoms()) {
                const std::int64_t t = j + a.k;
                if (t >= jLevel_ && t < jLevel_ + kmax)
                    rhs(static_cast<Eigen::Index>(j - jFloor_),
                        static_cast<Eigen::Index>(t - jLevel_)) += discount_ * a.p;
            }
        return lu_.solve(rhs);
    }

    double discount() const { return discount_; }

private:
    const IncrementLaw& law_;
    std::int64_t jFloor_, jLevel_;
    double discount_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

double skipFreeZeroDiscountValue(const IncrementLaw& law, const RewardFunction& f,
                                 double start, std::int64_t jLevel, PassageKind kind) {
    const double h = law.step();
    const double hit = start + static_cast<double>(jLevel) * h;
    if (kind == PassageKind::Entry || jLevel >= 1) return f.eval(hit);
    // first step decides; from below, the skip-free walk cannot overshoot
    double v = 0.0;
    for (const auto& a : law.atoms())
        v += a.p * (a.k >= jLevel ? f.eval(start + static_cast<double>(a.k) * h) : f.eval(hit));
    return v;
}

void requireLattice(const IncrementLaw& law) {
    if (!law.isLattice())
        throw PreconditionViolation("stochastic", "exact first passage needs a lattice law");
}

} // namespace

double firstPassageExact(const IncrementLaw& law, const RewardFunction& f, double q,
                         double level, double start, PassageKind kind) {
    requireLattice(law);
    const double h = law.step();
    const std::int64_t jLevel = levelIndex(level, start, h);
    if (kind == PassageKind::Entry && jLevel <= 0) return f.eval(start);

    const std::int64_t kmax = law.maxStepCount();
    const std::int64_t kmin = law.minStepCount();
    const double mean = law.mean();

    if (q == 0.0 && mean >= 0.0 && law.skipFreeUp())
        return skipFreeZeroDiscountValue(law, f, start, jLevel, kind);
    if (q == 0.0 && mean == 0.0)
        throw UnboundedExpectation(
            "zero discount with zero drift: no geometric truncation bound; classify the regime first");

    const double topAbsorb =
        start + static_cast<double>(std::max<std::int64_t>(jLevel, 1) - 1 + kmax) * h;
    const double G = f.eval(topAbsorb);
    if (G == 0.0) return 0.0;

    const std::int64_t depth = chooseDepth(law, q, G);
    std::int64_t jFloor = std::min<std::int64_t>(0, jLevel) - depth;
    jFloor = std::min(jFloor, kmin); // one-step targets from the start stay inside

    const LatticeSolver solver(law, q, jFloor, jLevel);
    const Eigen::VectorXd v = solver.solveForReward(f, start);

    if (jLevel >= 1) return v[static_cast<Eigen::Index>(-jFloor)];

    // StrictReturn from a start already at or above the level
    double acc = 0.0;
    for (const auto& a : law.atoms()) {
        if (a.k >= jLevel)
            acc += a.p * f.eval(start + static_cast<double>(a.k) * h);
        else
            acc += a.p * v[static_cast<Eigen::Index>(a.k - jFloor)];
    }
    return solver.discount() * acc;
}

std::vector<double> firstPassageExactBatch(const IncrementLaw& law, const RewardFunction& f,
                                           double q, double level, std::span<const double> starts) {
    requireLattice(law);
    if (starts.empty()) return {};
    const double h = law.step();
    const double origin = starts.front();
    std::vector<std::int64_t> js(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const double r = (starts[i] - origin) / h;
        const double snapped = std::round(r);
        if (std::abs(r - snapped) > 1e-9)
            throw PreconditionViolation("stochastic", "batch starts must be lattice-commensurate");
        js[i] = static_cast<std::int64_t>(snapped);
    }
    const std::int64_t jLevel = levelIndex(level, origin, h);

    std::vector<double> out(starts.size());
    bool anyTransient = false;
    std::int64_t jLo = jLevel;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        if (js[i] >= jLevel) {
            out[i] = f.eval(starts[i]);
        } else {
            anyTransient = true;
            jLo = std::min(jLo, js[i]);
        }
    }
    if (!anyTransient) return out;

    const double mean = law.mean();
    if (q == 0.0 && mean >= 0.0) {
        if (law.skipFreeUp()) {
            const double hit = origin + static_cast<double>(jLevel) * h;
            for (std::size_t i = 0; i < starts.size(); ++i)
                if (js[i] < jLevel) out[i] = f.eval(hit);
            return out;
        }
        if (mean == 0.0)
            throw UnboundedExpectation(
                "zero discount with zero drift: no geometric truncation bound; classify the regime first");
    }

    const std::int64_t kmax = law.maxStepCount();
    const double G = f.eval(origin + static_cast<double>(jLevel - 1 + kmax) * h);
    if (G == 0.0) {
        for (std::size_t i = 0; i < starts.size(); ++i)
            if (js[i] < jLevel) out[i] = 0.0;
        return out;
    }
    const std::int64_t depth = chooseDepth(law, q, G);
    const std::int64_t jFloor = std::min(jLo, jLevel - 1) - depth;

    const LatticeSolver solver(law, q, jFloor, jLevel);
    const Eigen::VectorXd v = solver.solveForReward(f, origin);
    for (std::size_t i = 0; i < starts.size(); ++i)
        if (js[i] < jLevel) out[i] = v[static_cast<Eigen::Index>(js[i] - jFloor)];
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

struct BatchAccum {
    double sum = 0.0;
    double sumSq = 0.0;
    double trunc = 0.0;
    long n = 0;
};

struct McSetup {
    double logG = 0.0;   // log of the reward envelope at absorption
    double alpha = 0.0;  // depth decay per unit of x
    double logAbandon = 0.0;
};

McSetup mcSetup(const IncrementLaw& law, const RewardFunction& f, double q, double level,
                const McOptions& opts) {
    McSetup s;
    if (std::isfinite(f.supLogValue())) {
        s.logG = f.supLogValue();
    } else if (std::isfinite(law.maxIncrement())) {
        s.logG = f.logEval(level + law.maxIncrement());
    } else {
        const double scale = 10.0 * std::max(1.0, 4.0 * std::abs(law.mean()));
        s.logG = f.logEval(level + scale);
    }
    s.logG = std::max(s.logG, f.logEval(level));
    if (s.logG == -kInf) s.logG = 0.0;
    s.alpha = law.mgfRoot(q).value_or(0.0);
    s.logAbandon = std::log(opts.abandonThreshold);
    return s;
}

void requireMcRegime(const IncrementLaw& law, double q, const McOptions& opts) {
    if (q == 0.0 && !(law.mean() < 0.0) && !opts.allowZeroDiscountNonNegativeDrift)
        throw PreconditionViolation(
            "stochastic",
            "zero discount without certified negative drift: classify the regime or set the override");
}

} // namespace

FirstPassageSample sampleFirstPassage(const IncrementLaw& law, double q, double level,
                                      double start, PassageKind kind, Rng& rng,
                                      const McOptions& opts) {
    FirstPassageSample s;
    if (kind == PassageKind::Entry && start >= level)
        return {true, 0, start, 1.0};
    requireMcRegime(law, q, opts);
    const double alpha = law.mgfRoot(q).value_or(0.0);
    const bool onLattice = law.isLattice();
    const double h = onLattice ? law.step() : 0.0;
    const std::int64_t jLevel = onLattice ? levelIndex(level, start, h) : 0;
    double pos = start;
    std::int64_t j = 0;
    long n = 0;
    for (;;) {
        if (n >= opts.maxSteps) return s;
        double depth;
        bool absorbed;
        if (onLattice) {
            j += law.drawStep(rng);
            ++n;
            absorbed = j >= jLevel;
            pos = start + static_cast<double>(j) * h;
            depth = static_cast<double>(jLevel - j) * h;
        } else {
            pos += law.draw(rng);
            ++n;
            absorbed = pos >= level;
            depth = level - pos;
        }
        if (absorbed) return {true, n, pos, std::exp(-q * static_cast<double>(n))};
        if (-q * static_cast<double>(n) - alpha * depth < std::log(opts.abandonThreshold)) return s;
    }
}

PassageEstimate firstPassageMC(const IncrementLaw& law, const RewardFunction& f, double q,
                               double level, double start, PassageKind kind, const McOptions& opts) {
    if (opts.budget < 1) throw PreconditionViolation("stochastic", "budget must be at least 1");
    if (kind == PassageKind::Entry && start >= level)
        return {f.eval(start), 0.0, 0.0, opts.budget};
    requireMcRegime(law, q, opts);

    const McSetup setup = mcSetup(law, f, q, level, opts);
    const long nBatches = (opts.budget + opts.batchSize - 1) / opts.batchSize;
    std::vector<BatchAccum> acc(static_cast<std::size_t>(nBatches));

    // lattice paths walk in exact integer offsets so the weak level
    // comparison is not at the mercy of floating-point accumulation
    const bool onLattice = law.isLattice();
    const double h = onLattice ? law.step() : 0.0;
    const std::int64_t jLevel = onLattice ? levelIndex(level, start, h) : 0;

    parallelFor(static_cast<std::size_t>(nBatches), opts.threads, [&](std::size_t b) {
        Rng rng(Rng::deriveStream(opts.seed, b));
        const long lo = static_cast<long>(b) * opts.batchSize;
        const long count = std::min(opts.batchSize, opts.budget - lo);
        BatchAccum& slot = acc[b];
        for (long i = 0; i < count; ++i) {
            double pos = start;
            std::int64_t j = 0;
            long n = 0;
            double value = 0.0;
            for (;;) {
                if (n >= opts.maxSteps) {
                    slot.trunc += std::exp(-q * static_cast<double>(n) + setup.logG);
                    break;
                }
                double depth;
                bool absorbed;
                if (onLattice) {
                    j += law.drawStep(rng);
                    ++n;
                    absorbed = j >= jLevel;
                    pos = start + static_cast<double>(j) * h;
                    depth = static_cast<double>(jLevel - j) * h;
                } else {
                    pos += law.draw(rng);
                    ++n;
                    absorbed = pos >= level;
                    depth = level - pos;
                }
                if (absorbed) {
                    value = std::exp(-q * static_cast<double>(n) + f.logEval(pos));
                    break;
                }
                const double logBound =
                    -q * static_cast<double>(n) - setup.alpha * depth + setup.logG;
                if (logBound < setup.logAbandon) {
                    slot.trunc += std::exp(logBound);
                    break;
                }
            }
            slot.sum += value;
            slot.sumSq += value * value;
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
    PassageEstimate est;
    est.budget = n;
    est.value = sum / static_cast<double>(n);
    est.truncationBound = trunc / static_cast<double>(n);
    if (n > 1) {
        const double var = std::max(0.0, (sumSq - sum * sum / n) / static_cast<double>(n - 1));
        est.se = std::sqrt(var / static_cast<double>(n));
    } else {
        est.se = kInf; // single-path estimate: spread unknowable
    }
    if (est.truncationBound > 0.1 * est.value + 1e-10 * std::max(1.0, std::exp(setup.logG)))
        throw TruncationDominates("abandoned paths may carry more than 10% of the estimate");
    return est;
}

ReturnKernel exactReturnKernel(const IncrementLaw& law, double q) {
    requireLattice(law);
    const double h = law.step();
    const std::int64_t kmax = law.maxStepCount();

    if (q == 0.0 && law.mean() >= 0.0 && law.skipFreeUp()) {
        // re-ascent happens almost surely and lands exactly on the level
        ReturnKernel kernel;
        kernel.exact = true;
        double below = 0.0, at = 0.0, up = 0.0;
        for (const auto& a : law.atoms()) {
            if (a.k < 0) below += a.p;
            if (a.k == 0) at += a.p;
            if (a.k == 1) up += a.p;
        }
        if (below + at > 0.0) {
            kernel.weight.push_back(below + at);
            kernel.overshoot.push_back(0.0);
        }
        kernel.weight.push_back(up);
        kernel.overshoot.push_back(h);
        return kernel;
    }

    const std::int64_t depth = chooseDepth(law, q, 1.0);
    const std::int64_t jFloor = std::min<std::int64_t>(law.minStepCount(), -1) - depth;
    const LatticeSolver solver(law, q, jFloor, 0);
    const Eigen::MatrixXd reach = solver.solveForTargets(); // columns: targets 0..kmax-1

    ReturnKernel kernel;
    kernel.exact = true;
    const double d = solver.discount();
    for (std::int64_t o = 0; o <= kmax; ++o) {
        double w = 0.0;
        for (const auto& a : law.atoms()) {
            if (a.k == o) w += d * a.p; // absorbed on the first step
            if (a.k < 0 && o < kmax)
                w += d * a.p * reach(static_cast<Eigen::Index>(a.k - jFloor), static_cast<Eigen::Index>(o));
        }
        if (w > 0.0) {
            kernel.weight.push_back(w);
            kernel.overshoot.push_back(static_cast<double>(o) * h);
        }
    }
    return kernel;
}

ReturnKernel mcReturnKernel(const IncrementLaw& law, double q, const McOptions& opts) {
    if (opts.budget < 1) throw PreconditionViolation("stochastic", "budget must be at least 1");
    requireMcRegime(law, q, opts);
    const double alpha = law.mgfRoot(q).value_or(0.0);
    const double logAbandon = std::log(opts.abandonThreshold);

    ReturnKernel kernel;
    kernel.budget = opts.budget;
    kernel.weight.assign(static_cast<std::size_t>(opts.budget), 0.0);
    kernel.overshoot.assign(static_cast<std::size_t>(opts.budget), 0.0);

    const long nBatches = (opts.budget + opts.batchSize - 1) / opts.batchSize;
    std::vector<double> truncs(static_cast<std::size_t>(nBatches), 0.0);

    const bool onLattice = law.isLattice();
    const double h = onLattice ? law.step() : 0.0;

    parallelFor(static_cast<std::size_t>(nBatches), opts.threads, [&](std::size_t b) {
        Rng rng(Rng::deriveStream(opts.seed, b));
        const long lo = static_cast<long>(b) * opts.batchSize;
        const long count = std::min(opts.batchSize, opts.budget - lo);
        for (long i = 0; i < count; ++i) {
            double pos = 0.0;
            std::int64_t j = 0;
            long n = 0;
            for (;;) {
                if (n >= opts.maxSteps) {
                    truncs[b] += std::exp(-q * static_cast<double>(n));
                    break;
                }
                if (onLattice) {
                    j += law.drawStep(rng);
                    pos = static_cast<double>(j) * h;
                } else {
                    pos += law.draw(rng);
                }
                ++n;
                if (pos >= 0.0) {
                    kernel.weight[static_cast<std::size_t>(lo + i)] = std::exp(-q * static_cast<double>(n));
                    kernel.overshoot[static_cast<std::size_t>(lo + i)] = pos;
                    break;
                }
                const double logBound = -q * static_cast<double>(n) + alpha * pos;
                if (logBound < logAbandon) {
                    truncs[b] += std::exp(logBound);
                    break;
                }
            }
        }
    });

    for (double t : truncs) kernel.truncationBound += t;
    kernel.truncationBound /= static_cast<double>(opts.budget);
    return kernel;
}

Estimate passageValueFromKernel(const ReturnKernel& kernel, const RewardFunction& f, double x) {
    if (kernel.exact) {
        double v = 0.0;
        for (std::size_t i = 0; i < kernel.weight.size(); ++i)
            v += kernel.weight[i] * f.eval(x + kernel.overshoot[i]);
        return {v, 0.0};
    }
    double sum = 0.0, sumSq = 0.0;
    const auto n = kernel.weight.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = kernel.weight[i] > 0.0 ? kernel.weight[i] * f.eval(x + kernel.overshoot[i]) : 0.0;
        sum += v;
        sumSq += v * v;
    }
    Estimate e;
    e.value = sum / static_cast<double>(n);
    if (n > 1) {
        const double var = std::max(0.0, (sumSq - sum * sum / static_cast<double>(n)) / static_cast<double>(n - 1));
        e.se = std::sqrt(var / static_cast<double>(n));
    } else {
        e.se = kInf;
    }
    return e;
}

Estimate ratioFromKernel(const ReturnKernel& kernel, const RewardFunction& f, double x) {
    const double hx = f.logEval(x);
    if (hx == -kInf) return {kInf, 0.0}; // a/0 with a >= 0
    // reward ratios through log differences: concavity keeps the exponent
    // bounded, and a rescaled reward cancels exactly
    if (kernel.exact) {
        double v = 0.0;
        for (std::size_t i = 0; i < kernel.weight.size(); ++i)
            v += kernel.weight[i] * std::exp(f.logEval(x + kernel.overshoot[i]) - hx);
        return {v, 0.0};
    }
    double sum = 0.0, sumSq = 0.0;
    const auto n = kernel.weight.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = kernel.weight[i] > 0.0
                             ? kernel.weight[i] * std::exp(f.logEval(x + kernel.overshoot[i]) - hx)
                             : 0.0;
        sum += v;
        sumSq += v * v;
    }
    Estimate e;
    e.value = sum / static_cast<double>(n);
    if (n > 1) {
        const double var =
            std::max(0.0, (sumSq - sum * sum / static_cast<double>(n)) / static_cast<double>(n - 1));
        e.se = std::sqrt(var / static_cast<double>(n));
    } else {
        e.se = kInf;
    }
    return e;
}

// ---------------------------------------------------------------------------
// Expected all-time maximum

namespace {

// P(first ascent by one lattice unit ever happens), negative-drift skip-free walk
double upOneProbability(const IncrementLaw& law) {
    const auto F = [&](double r) {
        double s = -r;
        for (const auto& a : law.atoms())
            s += a.p * std::pow(r, static_cast<double>(1 - a.k));
        return s;
    };
    double lo = 1e-12, hi = 1.0 - 1e-12;
    if (F(hi) >= 0.0) return hi; // numerically at the recurrent boundary
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        (F(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

Estimate expectedMaximum(const IncrementLaw& law, const McOptions& opts) {
    if (!(law.mean() < 0.0)) return {kInf, 0.0};

    if (law.isLattice()) {
        if (law.skipFreeUp()) {
            const double r = upOneProbability(law);
            return {law.step() * r / (1.0 - r), 0.0};
        }
        const ReturnKernel kernel = exactReturnKernel(law, 0.0);
        double a = 0.0, pfin = 0.0;
        for (std::size_t i = 0; i < kernel.weight.size(); ++i) {
            a += kernel.weight[i] * kernel.overshoot[i];
            pfin += kernel.weight[i];
        }
        return {a / (1.0 - pfin), 0.0};
    }

    // ladder fixed point: M =d (X_T + M') on {T < inf}, so
    // E M = E[X_T; T < inf] / P(T = inf)
    const ReturnKernel kernel = mcReturnKernel(law, 0.0, opts);
    const auto n = static_cast<double>(kernel.weight.size());
    double sumO = 0.0, sumOO = 0.0, sumP = 0.0, sumOP = 0.0;
    for (std::size_t i = 0; i < kernel.weight.size(); ++i) {
        const double hit = kernel.weight[i] > 0.0 ? 1.0 : 0.0;
        const double o = hit * kernel.overshoot[i];
        sumO += o;
        sumOO += o * o;
        sumP += hit;
        sumOP += o * hit;
    }
    const double aHat = sumO / n;
    const double pHat = sumP / n;
    const double em = aHat / (1.0 - pHat);
    const double varO = std::max(0.0, sumOO / n - aHat * aHat);
    const double varP = std::max(0.0, pHat * (1.0 - pHat));
    const double covOP = sumOP / n - aHat * pHat;
    const double ga = 1.0 / (1.0 - pHat);
    const double gp = aHat / ((1.0 - pHat) * (1.0 - pHat));
    const double var = ga * ga * varO + gp * gp * varP + 2.0 * ga * gp * covOP;
    return {em, std::sqrt(std::max(var, 0.0) / n)};
}

} // namespace optstop
