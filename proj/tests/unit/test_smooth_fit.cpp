#include "optstop/errors.hpp"
#include "optstop/smooth_fit.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace optstop;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLambda = 1.2564312086261697; // root of 0.5(e^l - 1) = l

RewardFunction degenerateReward() {
    // log-linear with slope lambda on (0, 1], quadratic below, saturating above
    auto h = [](double x) {
        if (x <= 0.0) return kLambda * x - x * x;
        if (x <= 1.0) return kLambda * x;
        return kLambda * (2.0 - 1.0 / x);
    };
    auto hp = [](double x) {
        if (x < 0.0) return kLambda - 2.0 * x;
        if (x <= 1.0) return kLambda;
        return kLambda / (x * x);
    };
    return RewardFunction::custom(h, hp, hp, -kInf, 0.0, true, 2.0 * kLambda);
}

LevyModel poissonDrift() { return LevyModel(-1.0, 0.0, LevyJumps{0.5, JumpLaw::constant(1.0)}); }
} // namespace

TEST_CASE("degeneracy criterion") {
    SUBCASE("log-linear across the overshoot span holds and yields the closed form") {
        const CriterionCheck c = checkCriterionA1(degenerateReward(), 0.0, 1.0);
        CHECK(c.verdict == CriterionVerdict::Holds);
        REQUIRE(c.valueBelow);
        CHECK(c.valueBelow(-0.5) == doctest::Approx(std::exp(-kLambda / 2.0)).epsilon(1e-12));
        CHECK(c.valueBelow(0.0) == doctest::Approx(1.0));
    }
    SUBCASE("slope drop inside the span fails") {
        const auto f = RewardFunction::piecewiseLogLinear({1.0}, {1.0, 0.5}, 0.0, 0.0);
        const CriterionCheck c = checkCriterionA1(f, 0.0, 1.5);
        CHECK(c.verdict == CriterionVerdict::Fails);
    }
    SUBCASE("unbounded overshoot compares against the asymptotic slope") {
        // h'(u+) = 1/(1 - e^{-(u - x0)}) > 1 = beta at u = 1
        const CriterionCheck c = checkCriterionA1(RewardFunction::expCall(1.0), 1.0, kInf);
        CHECK(c.verdict == CriterionVerdict::Fails);
        CHECK(c.slopeBeyondOvershoot == doctest::Approx(1.0));
    }
}

TEST_CASE("overshoot essential supremum") {
    SUBCASE("unit jumps") {
        const OvershootSupremum z = overshootEssSup(poissonDrift(), 20000, 9);
        CHECK(z.value == 1.0);
        CHECK(z.maxObserved > 0.9);
        CHECK(z.maxObserved <= 1.0);
    }
    SUBCASE("uniform jumps up to two") {
        const LevyModel model(-1.0, 0.0, LevyJumps{0.7, JumpLaw::uniform(0.0, 2.0)});
        const OvershootSupremum z = overshootEssSup(model, 20000, 10);
        CHECK(z.value == 2.0);
        CHECK(z.maxObserved > 1.9);
        CHECK(z.maxObserved <= 2.0);
    }
    SUBCASE("exponential jumps are unbounded") {
        const LevyModel model(-1.0, 0.0, LevyJumps{0.5, JumpLaw::exponential(1.0)});
        const OvershootSupremum z = overshootEssSup(model, 5000, 11);
        CHECK(std::isinf(z.value));
        CHECK(z.isLowerBound);
    }
}

TEST_CASE("overshoot derivative formula preconditions") {
    CHECK_THROWS_AS(
        overshootDerivativeFormula(LevyModel(0.0, 1.0), degenerateReward(), 0.0, 0.0, 1000, 1),
        PreconditionViolation);
}

TEST_CASE("overshoot derivative formula recovers the martingale slope") {
    // at u = 0 the formula evaluates lambda E[e^{lambda X}] over the first
    // strict ascent, which the tuned martingale pins at lambda
    const DerivativeEstimate d =
        overshootDerivativeFormula(poissonDrift(), degenerateReward(), 0.0, 0.0, 100000, 12);
    CHECK(std::abs(d.value - kLambda) <= std::max(3.0 * d.error, 0.02));
}

TEST_CASE("left value derivative on the degenerate instance") {
    SmoothFitOptions opts;
    opts.seed = 13;
    opts.baseBudget = 20000;
    const DerivativeEstimate d = leftDerivativeOfValue(poissonDrift(), degenerateReward(), 0.0, 0.0, opts);
    CHECK(std::abs(d.value - kLambda) <= std::max(3.0 * d.error, 0.05));
    CHECK(d.table.size() >= 3); // one-sided differences tabulated alongside
}

TEST_CASE("threshold estimates snap onto reward kinks") {
    const auto f = RewardFunction::piecewiseLogLinear({0.0}, {2.0, 0.0}, 0.0, 0.0);
    CHECK(refineThresholdNearKink(f, -0.013, 0.05) == 0.0);
    CHECK(refineThresholdNearKink(f, -0.2, 0.05) == -0.2); // too far: unchanged
    // no kink: slopes equal across the knot
    const auto smooth = RewardFunction::piecewiseLogLinear({0.0}, {1.0, 1.0 - 1e-13}, 0.0, 0.0);
    CHECK(refineThresholdNearKink(smooth, -0.013, 0.05) == -0.013);
}

TEST_CASE("smooth-fit analysis refusals") {
    SmoothFitOptions opts;
    opts.baseBudget = 1000;
    CHECK_THROWS_AS(
        analyzeSmoothFit(poissonDrift(), degenerateReward(), 0.0, kInf, opts),
        PreconditionViolation);
    // threshold at the positivity edge: the analysis declines
    CHECK_THROWS(analyzeSmoothFit(LevyModel(0.0, 1.0), RewardFunction::indicator(0.0), 0.5, 0.0, opts));
}

TEST_CASE("strictly concave reward over the overshoot span pushes the slope down") {
    // h = lambda x - 0.1 x^2 on (0, 1], linear with slope lambda - 0.2 beyond
    auto h = [](double x) {
        if (x <= 0.0) return kLambda * x - x * x;
        if (x <= 1.0) return kLambda * x - 0.1 * x * x;
        return kLambda - 0.1 + (kLambda - 0.2) * (x - 1.0);
    };
    auto hp = [](double x) {
        if (x < 0.0) return kLambda - 2.0 * x;
        if (x <= 1.0) return kLambda - 0.2 * x;
        return kLambda - 0.2;
    };
    const auto f = RewardFunction::custom(h, hp, hp, -kInf, kLambda - 0.2, false);

    const CriterionCheck crit = checkCriterionA1(f, 0.0, 1.0);
    CHECK(crit.verdict == CriterionVerdict::Fails);

    const DerivativeEstimate d = overshootDerivativeFormula(poissonDrift(), f, 0.0, 0.0, 80000, 21);
    // strictly below g'(0+) = lambda: the overshoot lands where the slope has dropped
    CHECK(d.value < kLambda - std::max(3.0 * d.error, 0.02));
}

TEST_CASE("regular process with a differentiable reward keeps smooth fit") {
    const LevyModel model(0.0, 1.0);
    const auto f = RewardFunction::expPut(2.0);
    const double q = 0.5;
    SolverOptions base;
    base.tol = 0.005;
    base.confidence = 0.999;
    base.mc.seed = 22;
    const ThresholdSequence seq = thresholdSequence(model, f, q, 7, 8000, base);
    REQUIRE(std::isfinite(seq.extrapolated));
    const double u = seq.extrapolated;

    SmoothFitOptions opts;
    opts.seed = 23;
    opts.baseBudget = 15000;
    const SmoothFitReport rep = analyzeSmoothFit(model, f, q, u, opts);
    CHECK(rep.regularity == Regularity::Regular);
    CHECK(rep.verdict == SmoothFitVerdict::SmoothFitHolds);
    CHECK(std::abs(rep.vPrimeLeft - rep.gPrimeRight) <=
          3.0 * rep.vPrimeLeftError + 0.1 * std::abs(rep.gPrimeRight));
}

TEST_CASE("full irregular analysis verdict") {
    SmoothFitOptions opts;
    opts.seed = 14;
    opts.baseBudget = 10000;
    opts.overshootBudget = 40000;
    const SmoothFitReport rep = analyzeSmoothFit(poissonDrift(), degenerateReward(), 0.0, 0.0, opts);
    CHECK(rep.regularity == Regularity::Irregular);
    REQUIRE(rep.zeta.has_value());
    CHECK(*rep.zeta == 1.0);
    REQUIRE(rep.criterion.has_value());
    CHECK(*rep.criterion == CriterionVerdict::Holds);
    CHECK(rep.verdict == SmoothFitVerdict::SmoothFitHolds);
    CHECK(rep.vPrimeRight == doctest::Approx(kLambda)); // g'(0+) = lambda e^{0}
}
