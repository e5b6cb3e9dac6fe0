#include "optstop/acceptance.hpp"

#include "optstop/dp_oracle.hpp"
#include "optstop/errors.hpp"
#include "optstop/smooth_fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace optstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Criterion {
public:
    explicit Criterion(std::string name) : name_(std::move(name)) { detail_.precision(10); }

    void expect(bool cond, const std::string& label) {
        if (!cond) pass_ = false;
        detail_ << (cond ? "" : "FAIL:") << label << "; ";
    }

    template <typename T>
    Criterion& operator<<(const T& v) {
        detail_ << v;
        return *this;
    }

    AcceptanceResult finish() const { return {name_, pass_, detail_.str()}; }

    bool passing() const { return pass_; }

private:
    std::string name_;
    bool pass_ = true;
    std::ostringstream detail_;
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.8g", v);
    return buf;
}

IncrementLaw upDownWalk(double pUp) {
    return IncrementLaw::lattice(1.0, {{1.0, pUp}, {-1.0, 1.0 - pUp}});
}

// frozen reference values (direct evaluation of the stated formulas)
constexpr double kExpectedMaxQuarter = 0.5;          // p/(1-2p) at p = 1/4
constexpr double kValueAtZeroQuarter = 1.0 / 3.0;    // skip-free passage 0 -> 1
constexpr double kExpMinusOne = 0.36787944117144233; // e^{-1}
constexpr double kPoissonDriftRoot = 1.2564312086261697; // root of 0.5(e^l - 1) - l

// --------------------------------------------------------------------------
// 1. threshold equals the expected all-time maximum on the reference walk

AcceptanceResult criterionExpectedMaximum(const AcceptanceOptions& ao) {
    Criterion c("u-equals-expected-maximum");
    const IncrementLaw law = upDownWalk(0.25);
    const RewardFunction f = RewardFunction::powerPlus(1.0);
    SolverOptions opts;
    opts.tol = 1e-6;
    opts.mc.threads = ao.threads;

    const Solution sol = solve(law, f, 0.0, opts);
    c.expect(sol.threshold.regime == Regime::Finite, "regime finite");
    c.expect(std::abs(sol.threshold.u - kExpectedMaxQuarter) <= 1e-3,
             "|u - 0.5| <= 1e-3 (u = " + num(sol.threshold.u) + ")");
    const Estimate em = expectedMaximum(law);
    c.expect(std::abs(em.value - kExpectedMaxQuarter) <= 1e-12,
             "expected maximum = 0.5 (got " + num(em.value) + ")");
    const double v0 = sol.value(0.0);
    c.expect(std::abs(v0 - kValueAtZeroQuarter) <= 1e-6,
             "|V(0) - 1/3| <= 1e-6 (V(0) = " + num(v0) + ")");

    const DpResult dp = valueIteration(law, f, 0.0, -40.0, 40.0);
    const OneSidedCheck one = checkOneSided(dp);
    c.expect(one.isUpSet, "oracle stopping set is an up-set");
    c.expect(one.threshold == 1.0, "oracle stopping set starts at 1 (got " + num(one.threshold) + ")");
    const CrossValidation cv = crossValidate(sol, dp, law.step());
    c.expect(cv.pass, "cross-validation passes (" + cv.note + ")");
    return c.finish();
}

// --------------------------------------------------------------------------
// 2. never-stop regime on the driftless walk

AcceptanceResult criterionNeverStop(const AcceptanceOptions& ao) {
    Criterion c("never-stop-regime");
    const IncrementLaw law = upDownWalk(0.5);
    const RewardFunction f = RewardFunction::powerPlus(1.0);
    const FinitenessVerdict v = lightTailCharacterization(law, f, 0.0);
    c.expect(v.verdict == Finiteness::Infinite, "classifier reports an infinite threshold");

    SolverOptions opts;
    opts.mc.threads = ao.threads;
    const ThresholdSolution sol = findThreshold(law, f, 0.0, opts);
    c.expect(sol.regime == Regime::NeverStop, "solver regime never-stop");
    c.expect(std::isinf(sol.w) && sol.wDiverged, "w = inf via diverging level iterates");
    c.expect(sol.levelIterates.size() >= 3, "at least three level iterates");
    if (sol.levelIterates.size() >= 3) {
        c.expect(std::abs(sol.levelIterates[0] - 10.0) <= 1e-9 &&
                     std::abs(sol.levelIterates[1] - 20.0) <= 1e-9 &&
                     std::abs(sol.levelIterates[2] - 40.0) <= 1e-9,
                 "iterates 10, 20, 40 (got " + num(sol.levelIterates[0]) + ", " +
                     num(sol.levelIterates[1]) + ", " + num(sol.levelIterates[2]) + ")");
    }
    return c.finish();
}

// --------------------------------------------------------------------------
// 3. Brownian indicator value at dyadic level 10

AcceptanceResult criterionBrownianIndicator(const AcceptanceOptions& ao) {
    Criterion c("brownian-indicator-value");
    const LevyModel model(0.0, 1.0);
    const RewardFunction f = RewardFunction::indicator(0.0);
    const double q = 0.5;

    SolverOptions base;
    base.tol = 1e-3;
    base.confidence = 0.999;
    base.mc.seed = Rng::deriveStream(ao.seed, 3);
    base.mc.threads = ao.threads;
    const ThresholdSequence seq = thresholdSequence(model, f, q, 10, 20000, base);
    const double u10 = seq.levels.back().u;
    c.expect(std::abs(u10) <= 0.05, "|u(10)| <= 0.05 (u(10) = " + num(u10) + ")");

    McOptions mc;
    mc.budget = 200000;
    mc.seed = Rng::deriveStream(ao.seed, 33);
    mc.threads = ao.threads;
    const Estimate v = valueAtLevel(model, f, q, 10, u10, -1.0, mc);
    const double tol = std::max(0.01, 4.0 * v.se);
    c.expect(std::abs(v.value - kExpMinusOne) <= tol,
             "|V(-1) - e^{-1}| <= " + num(tol) + " (V = " + num(v.value) + ", se = " + num(v.se) + ")");
    return c.finish();
}

// --------------------------------------------------------------------------
// 4. smooth fit fails at a reward kink under a regular process

AcceptanceResult criterionSmoothFitKink(const AcceptanceOptions& ao) {
    Criterion c("smooth-fit-kink");
    const LevyModel model(0.0, 1.0);
    const RewardFunction f =
        RewardFunction::piecewiseLogLinear({0.0}, {2.0, 0.0}, 0.0, 0.0); // min(e^{2x}, 1)
    const double q = 0.5;

    SolverOptions base;
    base.tol = 1e-3;
    base.confidence = 0.999;
    base.mc.seed = Rng::deriveStream(ao.seed, 4);
    base.mc.threads = ao.threads;
    const ThresholdSequence seq = thresholdSequence(model, f, q, 8, 20000, base);
    c.expect(std::abs(seq.extrapolated) <= 0.05,
             "sequence threshold near 0 (got " + num(seq.extrapolated) + ")");

    SmoothFitOptions sf;
    sf.seed = Rng::deriveStream(ao.seed, 44);
    sf.threads = ao.threads;
    sf.baseBudget = 40000;
    const SmoothFitReport rep = analyzeSmoothFit(model, f, q, 0.0, sf);
    c.expect(rep.gPrimeRight == 0.0, "g'(0+) = 0 (got " + num(rep.gPrimeRight) + ")");
    c.expect(std::abs(rep.vPrimeLeft - 1.0) <= 0.05,
             "|V'(0-) - 1| <= 0.05 (got " + num(rep.vPrimeLeft) + " +- " + num(rep.vPrimeLeftError) +
                 ")");
    c.expect(rep.verdict == SmoothFitVerdict::SmoothFitFails, "verdict: smooth fit fails");
    return c.finish();
}

// --------------------------------------------------------------------------
// 5. irregular smooth fit through the degenerate (log-linear) reward

RewardFunction remarkReward(double lambda) {
    // h: lambda x - x^2 on x <= 0, lambda x on (0, 1], lambda (2 - 1/x) beyond
    auto h = [lambda](double x) {
        if (x <= 0.0) return lambda * x - x * x;
        if (x <= 1.0) return lambda * x;
        return lambda * (2.0 - 1.0 / x);
    };
    auto hp = [lambda](double x) {
        if (x < 0.0) return lambda - 2.0 * x;
        if (x <= 1.0) return lambda;
        return lambda / (x * x);
    };
    return RewardFunction::custom(h, hp, hp, -kInf, 0.0, /*strictTailGap=*/true,
                                  /*supLogValue=*/2.0 * lambda);
}

AcceptanceResult criterionIrregularDegenerate(const AcceptanceOptions& ao) {
    Criterion c("irregular-degenerate-smooth-fit");
    const LevyModel model(-1.0, 0.0, LevyJumps{0.5, JumpLaw::constant(1.0)});
    const double q = 0.0;

    const auto root = stepLaw(model, 1.0).mgfRoot(q);
    c.expect(root.has_value(), "MGF root exists");
    const double lambda = root.value_or(0.0);
    c.expect(std::abs(lambda - kPoissonDriftRoot) <= 1e-4,
             "lambda' = " + num(kPoissonDriftRoot) + " +- 1e-4 (got " + num(lambda) + ")");

    const RewardFunction f = remarkReward(lambda);
    c.expect(regularityOfZero(model) == Regularity::Irregular, "0 is irregular for (0, inf)");

    SolverOptions base;
    base.tol = 0.01;
    base.confidence = 0.999;
    base.mc.seed = Rng::deriveStream(ao.seed, 5);
    base.mc.threads = ao.threads;
    const ThresholdSequence seq = thresholdSequence(model, f, q, 10, 40000, base);
    c.expect(std::abs(seq.extrapolated) <= 0.05,
             "threshold near 0 (got " + num(seq.extrapolated) + ")");

    McOptions mc;
    mc.budget = 200000;
    mc.seed = Rng::deriveStream(ao.seed, 55);
    mc.threads = ao.threads;
    const Estimate v = valueAtLevel(model, f, q, 10, 0.0, -0.5, mc);
    const double expected = std::exp(-lambda / 2.0);
    const double tol = 4.0 * v.se;
    c.expect(std::abs(v.value - expected) <= tol,
             "|V(-0.5) - e^{-lambda/2}| <= " + num(tol) + " (V = " + num(v.value) + ", target " +
                 num(expected) + ")");

    const OvershootSupremum zeta = overshootEssSup(model, 20000, Rng::deriveStream(ao.seed, 56));
    c.expect(zeta.value == 1.0, "zeta = 1 (got " + num(zeta.value) + ")");
    c.expect(zeta.maxObserved <= 1.0 && zeta.maxObserved > 0.9,
             "observed overshoots approach 1 (max seen " + num(zeta.maxObserved) + ")");

    const CriterionCheck crit = checkCriterionA1(f, 0.0, zeta.value);
    c.expect(crit.verdict == CriterionVerdict::Holds, "degeneracy criterion holds");
    if (crit.valueBelow)
        c.expect(std::abs(crit.valueBelow(-0.5) - expected) <= 1e-12,
                 "closed-form value matches e^{lambda x}");

    SmoothFitOptions sf;
    sf.seed = Rng::deriveStream(ao.seed, 57);
    sf.threads = ao.threads;
    sf.baseBudget = 40000;
    const DerivativeEstimate left = leftDerivativeOfValue(model, f, q, 0.0, sf);
    const DerivativeEstimate over =
        overshootDerivativeFormula(model, f, q, 0.0, 200000, Rng::deriveStream(ao.seed, 58));
    const double combined = left.error + over.error + 0.01;
    c.expect(std::abs(left.value - over.value) <= combined,
             "two derivative routes agree: " + num(left.value) + " vs " + num(over.value) +
                 " within " + num(combined));
    return c.finish();
}

// --------------------------------------------------------------------------
// randomized lattice instances shared by criteria 6 and 7

struct RandomInstance {
    IncrementLaw law;
    RewardFunction reward;
    double q;
};

RandomInstance drawInstance(Rng& rng) {
    const double h = 0.5;
    for (;;) {
        // law: 3-5 atoms on {-4..2} h with clearly negative mean
        const int na = 3 + static_cast<int>(rng.u01() * 3.0);
        std::vector<int> ks;
        while (static_cast<int>(ks.size()) < na) {
            const int k = -4 + static_cast<int>(rng.u01() * 7.0);
            if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
        }
        if (*std::max_element(ks.begin(), ks.end()) < 1) continue;
        std::vector<std::pair<double, double>> atoms;
        double total = 0.0;
        for (int k : ks) {
            const double w = 0.1 + rng.u01();
            atoms.emplace_back(k * h, w);
            total += w;
        }
        for (auto& [v, p] : atoms) p /= total;
        IncrementLaw law = IncrementLaw::lattice(h, atoms);
        if (!(law.mean() <= -0.3)) continue;

        const double q = rng.u01() < 0.25 ? 0.0 : 0.5 * rng.u01();
        const auto alphaRoot = law.mgfRoot(q);
        if (!alphaRoot || *alphaRoot < 0.15) continue;
        const double alpha = *alphaRoot;

        // reward: random piecewise-log-linear, sometimes with a positivity
        // edge; the tail slope stays below alpha so the threshold is finite,
        // and without an edge the head slope stays above it so the ratio
        // starts above 1
        std::optional<double> edge;
        if (rng.u01() < 0.5) edge = -2.0 + 2.0 * rng.u01();
        const int nb = 2 + static_cast<int>(rng.u01() * 3.0);
        std::vector<double> bps;
        double x = (edge ? *edge : -1.0) + 0.2 + rng.u01();
        for (int i = 0; i < nb; ++i) {
            bps.push_back(x);
            x += 0.3 + 1.5 * rng.u01();
        }
        std::vector<double> slopes;
        for (int i = 0; i <= nb; ++i) slopes.push_back(0.15 + 2.0 * rng.u01());
        std::sort(slopes.begin(), slopes.end(), std::greater<>());
        slopes.back() = rng.u01() < 0.5 ? 0.0 : std::min(0.7 * alpha, slopes[slopes.size() - 2]);
        if (!edge) slopes.front() = std::max(slopes.front(), alpha + 0.3 + rng.u01());
        const double anchorH = -0.5 + 1.5 * rng.u01();
        RewardFunction f =
            RewardFunction::piecewiseLogLinear(bps, slopes, bps.front(), anchorH, edge);

        if (lightTailCharacterization(law, f, q).verdict != Finiteness::Finite) continue;
        return {std::move(law), std::move(f), q};
    }
}

void checkInstanceStructure(Criterion& c, const RandomInstance& inst, int index, bool& anyFail) {
    const double h = inst.law.step();
    SolverOptions opts;
    opts.tol = 1e-9;
    const Solution sol = solve(inst.law, inst.reward, inst.q, opts);
    std::ostringstream tag;
    tag << "#" << index;
    if (sol.threshold.regime != Regime::Finite) {
        c.expect(false, tag.str() + " solver finite (got regime " +
                            std::to_string(static_cast<int>(sol.threshold.regime)) + " " +
                            sol.threshold.inconclusiveReason + ")");
        anyFail = true;
        return;
    }
    const double u = sol.threshold.u;

    const double alpha = inst.law.mgfRoot(inst.q).value_or(0.3);
    const double jumpRange =
        static_cast<double>(inst.law.maxStepCount() - inst.law.minStepCount()) * h;
    const double lo = u - std::max(17.0 / alpha, 2.0 * jumpRange);
    const double hi = u + 22.0 * jumpRange;
    DpOptions dpOpts;
    dpOpts.boundary = DpBoundary::GeometricExtrapolation;
    dpOpts.extrapolationRate = alpha; // the decay the value actually has below u
    const DpResult dp = valueIteration(inst.law, inst.reward, inst.q, lo, hi, dpOpts);

    const OneSidedCheck one = checkOneSided(dp);
    if (!one.isUpSet || std::abs(one.threshold - u) > h + 1e-6) {
        c.expect(false, tag.str() + " oracle threshold matches (dp " + num(one.threshold) + " vs u " +
                            num(u) + ")");
        anyFail = true;
    }

    const auto values = sol.value.profile(dp.grid);
    bool dominates = true, equalityUpSet = true, ratioMonotone = true;
    double firstEqual = kInf;
    double prevRatio = kInf;
    for (std::size_t i = 0; i < dp.grid.size(); ++i) {
        const double g = inst.reward.eval(dp.grid[i]);
        const double V = values[i].value;
        if (V < g - 1e-9 * std::max(1.0, g)) dominates = false;
        if (g > 0.0) {
            const bool equal = V - g <= 1e-9 * std::max(g, 1e-300);
            if (equal && firstEqual == kInf) firstEqual = dp.grid[i];
            if (!equal && firstEqual != kInf) equalityUpSet = false;
            const double ratio = V / g;
            if (ratio > prevRatio * (1.0 + 1e-9) + 1e-12) ratioMonotone = false;
            prevRatio = ratio;
        }
    }
    if (!dominates) {
        c.expect(false, tag.str() + " value dominates the reward");
        anyFail = true;
    }
    if (!(equalityUpSet && firstEqual != kInf && firstEqual >= u - 1e-6 &&
          firstEqual <= u + h + 1e-6)) {
        c.expect(false, tag.str() + " equality set is [u, inf) (first equal " + num(firstEqual) +
                            " vs u " + num(u) + ")");
        anyFail = true;
    }
    if (!ratioMonotone) {
        c.expect(false, tag.str() + " V/g nonincreasing");
        anyFail = true;
    }

    const CrossValidation cv = crossValidate(sol, dp, h);
    if (!cv.pass) {
        c.expect(false, tag.str() + " cross-validation (" + cv.note + ")");
        anyFail = true;
    }
}

AcceptanceResult criterionOneSidedStructure(const AcceptanceOptions& ao) {
    Criterion c("one-sided-structure-randomized");
    Rng rng(Rng::deriveStream(ao.seed, 6));
    bool anyFail = false;
    for (int i = 0; i < 100; ++i) {
        const RandomInstance inst = drawInstance(rng);
        try {
            checkInstanceStructure(c, inst, i, anyFail);
        } catch (const std::exception& e) {
            c.expect(false, "#" + std::to_string(i) + " threw: " + e.what());
            anyFail = true;
        }
    }
    c.expect(!anyFail, "100 randomized instances: up-set stopping region, threshold match, "
                       "dominance, equality on [u, inf), V/g monotone");
    return c.finish();
}

AcceptanceResult criterionRatioMonotoneFixedPoint(const AcceptanceOptions& ao) {
    Criterion c("ratio-monotone-fixed-point");
    Rng rng(Rng::deriveStream(ao.seed, 6)); // same instance stream as criterion 6
    bool anyFail = false;
    for (int i = 0; i < 100; ++i) {
        const RandomInstance inst = drawInstance(rng);
        SolverOptions opts;
        opts.tol = 1e-9;
        const ThresholdSolution sol = findThreshold(inst.law, inst.reward, inst.q, opts);
        std::ostringstream tag;
        tag << "#" << i;
        if (sol.regime != Regime::Finite) {
            c.expect(false, tag.str() + " finite regime");
            anyFail = true;
            continue;
        }
        auto trace = sol.ratioTrace;
        std::sort(trace.begin(), trace.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
        for (std::size_t k = 1; k < trace.size(); ++k) {
            const double prev = trace[k - 1].rho;
            const double cur = trace[k].rho;
            if (std::isinf(prev)) continue;
            if (cur > prev + 1e-9 * std::max(1.0, std::abs(prev))) {
                c.expect(false, tag.str() + " ratio nonincreasing at x = " + num(trace[k].x));
                anyFail = true;
                break;
            }
        }
        const double x0 = inst.reward.leftEdge();
        if (sol.u - (std::isfinite(x0) ? x0 : -kInf) > 0.05) {
            const Estimate rho = oneStepRatio(inst.law, inst.reward, inst.q, sol.u);
            if (std::abs(rho.value - 1.0) > 1e-6) {
                c.expect(false,
                         tag.str() + " |rho(u) - 1| <= 1e-6 (got " + num(rho.value - 1.0) + ")");
                anyFail = true;
            }
        }
    }
    c.expect(!anyFail, "100 instances: trace nonincreasing and rho(u) = 1 at interior thresholds");
    return c.finish();
}

// --------------------------------------------------------------------------
// 8. dyadic threshold monotonicity across levels

AcceptanceResult criterionDyadicMonotonicity(const AcceptanceOptions& ao) {
    Criterion c("dyadic-monotonicity");
    struct Instance {
        LevyModel model;
        RewardFunction reward;
        double q;
        const char* name;
    };
    const std::vector<Instance> instances = {
        {LevyModel(-0.3, 1.0), RewardFunction::indicator(0.0), 0.3, "bm(-0.3) indicator"},
        {LevyModel(0.0, 1.0), RewardFunction::indicator(0.0), 0.5, "bm(0) indicator"},
        {LevyModel(0.2, 1.0), RewardFunction::expPut(2.0), 0.4, "bm(+0.2) put"},
        {LevyModel(-0.5, 1.0), RewardFunction::powerPlus(1.0), 0.2, "bm(-0.5) linear"},
        {LevyModel(-1.0, 0.0, LevyJumps{0.5, JumpLaw::constant(1.0)}), RewardFunction::powerPlus(1.0),
         0.1, "poisson drift linear"},
        {LevyModel(-0.2, 0.5, LevyJumps{0.8, JumpLaw::uniform(0.0, 1.0)}),
         RewardFunction::powerPlus(1.0), 0.3, "jump diffusion linear"},
        {LevyModel(1.0, 1.0), RewardFunction::powerPlus(1.0), 0.0, "bm(+1) linear never-stop"},
        {LevyModel(-1.0, 0.0, LevyJumps{0.5, JumpLaw::exponential(1.0)}), RewardFunction::expPut(2.0),
         0.25, "poisson exp-jumps put"},
        {LevyModel(0.0, 1.0), RewardFunction::piecewiseLogLinear({0.0}, {2.0, 0.0}, 0.0, 0.0), 0.5,
         "bm(0) capped exponential"},
        {LevyModel(-1.0, 0.0, LevyJumps{0.5, JumpLaw::constant(1.0)}), RewardFunction::indicator(0.0),
         0.2, "poisson drift indicator"},
    };
    bool anyFail = false;
    int idx = 0;
    for (const auto& inst : instances) {
        SolverOptions base;
        base.tol = 0.02;
        base.confidence = 0.999;
        base.mc.seed = Rng::deriveStream(ao.seed, 80 + static_cast<std::uint64_t>(idx));
        base.mc.threads = ao.threads;
        try {
            const ThresholdSequence seq = thresholdSequence(inst.model, inst.reward, inst.q, 8,
                                                            20000, base);
            for (std::size_t l = 1; l < seq.levels.size(); ++l) {
                const double slack =
                    4.0 * (seq.levels[l - 1].tolerance + seq.levels[l].tolerance) + 1e-9;
                if (seq.levels[l].u < seq.levels[l - 1].u - slack) {
                    c.expect(false, std::string(inst.name) + " nondecreasing at level " +
                                        std::to_string(l));
                    anyFail = true;
                }
            }
        } catch (const Error& e) {
            c.expect(false, std::string(inst.name) + " threw: " + e.what());
            anyFail = true;
        }
        ++idx;
    }
    c.expect(!anyFail, "10 models, levels 0..8 nondecreasing within 4 sigma");
    return c.finish();
}

// --------------------------------------------------------------------------
// 9. classifier consistency and scaling invariance

AcceptanceResult criterionClassifierConsistency(const AcceptanceOptions& ao) {
    (void)ao;
    Criterion c("classifier-consistency");
    const std::vector<IncrementLaw> laws = {
        upDownWalk(0.25),
        upDownWalk(0.5),
        IncrementLaw::lattice(1.0, {{-1.0, 0.5}, {1.0, 0.3}, {2.0, 0.2}}),
        IncrementLaw::lattice(1.0, {{-2.0, 0.4}, {-1.0, 0.3}, {1.0, 0.3}}),
        IncrementLaw::lattice(1.0, {{-1.0, 0.7}, {2.0, 0.3}}),
        IncrementLaw::lattice(0.5, {{-0.5, 0.6}, {0.5, 0.4}}),
    };
    const std::vector<RewardFunction> rewards = {
        RewardFunction::powerPlus(1.0),
        RewardFunction::expLinear(0.0, 1.0),
        RewardFunction::expCall(1.0),
        RewardFunction::indicator(0.0),
        RewardFunction::expPut(2.0),
    };
    const double qs[] = {0.0, 0.05, 0.2, 0.7};

    bool anyFail = false;
    int idx = 0;
    for (std::size_t li = 0; li < laws.size(); ++li) {
        for (std::size_t ri = 0; ri < rewards.size(); ++ri, ++idx) {
            const IncrementLaw& law = laws[li];
            const RewardFunction& f = rewards[ri];
            const double q = qs[idx % 4];
            std::ostringstream tag;
            tag << "law" << li << "/reward" << ri << "/q=" << q;

            const FinitenessVerdict v = lightTailCharacterization(law, f, q);
            const FinitenessVerdict v3 = lightTailCharacterization(law, f.scaled(3.0), q);
            if (v.verdict != v3.verdict || v.betaUsed != v3.betaUsed) {
                c.expect(false, tag.str() + " scaling leaves the verdict unchanged");
                anyFail = true;
            }

            SolverOptions opts;
            opts.tol = 2.5e-10;
            if (v.verdict == Finiteness::Finite) {
                const ThresholdSolution sol = findThreshold(law, f, q, opts);
                if (sol.regime != Regime::Finite && sol.regime != Regime::StopEverywhere) {
                    c.expect(false, tag.str() + " finite verdict vs solver regime");
                    anyFail = true;
                    continue;
                }
                const ThresholdSolution sol3 = findThreshold(law, f.scaled(3.0), q, opts);
                const bool sameRegime = sol3.regime == sol.regime;
                const bool sameU = sol.regime != Regime::Finite ||
                                   std::abs(sol3.u - sol.u) <= 1e-9;
                if (!sameRegime || !sameU) {
                    c.expect(false, tag.str() + " threshold invariant under reward scaling");
                    anyFail = true;
                }
            } else if (v.verdict == Finiteness::Infinite) {
                // the ratio must stay above 1 wherever we can evaluate it exactly
                const bool kernelFeasible = q > 0.0 || law.mean() < 0.0 || law.skipFreeUp();
                if (kernelFeasible) {
                    const double base = std::isfinite(f.leftEdge()) ? f.leftEdge() : 0.0;
                    for (double off : {1.0, 3.0, 8.0}) {
                        const Estimate rho = oneStepRatio(law, f, q, base + off);
                        if (!(rho.value > 1.0 - 1e-12)) {
                            c.expect(false, tag.str() + " rho stays above 1 (rho(" +
                                                num(base + off) + ") = " + num(rho.value) + ")");
                            anyFail = true;
                        }
                    }
                }
            }
        }
    }
    c.expect(!anyFail, "30 instances: classifier never contradicts the solver; verdicts and "
                       "thresholds invariant under reward rescaling");
    return c.finish();
}

} // namespace

std::vector<AcceptanceResult> runAcceptanceSuite(const AcceptanceOptions& opts, bool print) {
    std::vector<AcceptanceResult> results;
    const auto run = [&](const char* name, AcceptanceResult (*fn)(const AcceptanceOptions&)) {
        AcceptanceResult r;
        try {
            r = fn(opts);
        } catch (const std::exception& e) {
            r.name = name;
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        if (print)
            std::printf("%-34s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                        r.pass ? "" : r.detail.c_str());
        results.push_back(std::move(r));
    };
    run("u-equals-expected-maximum", criterionExpectedMaximum);
    run("never-stop-regime", criterionNeverStop);
    run("brownian-indicator-value", criterionBrownianIndicator);
    run("smooth-fit-kink", criterionSmoothFitKink);
    run("irregular-degenerate-smooth-fit", criterionIrregularDegenerate);
    run("one-sided-structure-randomized", criterionOneSidedStructure);
    run("ratio-monotone-fixed-point", criterionRatioMonotoneFixedPoint);
    run("dyadic-monotonicity", criterionDyadicMonotonicity);
    run("classifier-consistency", criterionClassifierConsistency);
    return results;
}

} // namespace optstop
