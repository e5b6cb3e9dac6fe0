#include "optstop/errors.hpp"
#include "optstop/levy.hpp"

#include <doctest.h>

#include <cmath>

using namespace optstop;

TEST_CASE("step laws compose the exponent exactly") {
    SUBCASE("Brownian scaling") {
        const LevyModel model(0.7, 1.0);
        const double dt = 1.0 / 16.0;
        const auto law = stepLaw(model, dt);
        CHECK(law.mean() == doctest::Approx(0.7 * dt));
        for (double l : {0.3, 1.0, 2.5})
            CHECK(law.logMgf(l) == doctest::Approx(dt * (0.7 * l + 0.5 * l * l)).epsilon(1e-12));
    }
    SUBCASE("unit drift down with unit Poisson jumps") {
        const LevyModel model(-1.0, 0.0, LevyJumps{0.5, JumpLaw::constant(1.0)});
        const auto law = stepLaw(model, 1.0);
        for (double l : {0.5, 1.0, 2.0})
            CHECK(law.logMgf(l) ==
                  doctest::Approx(0.5 * std::expm1(l) - l).epsilon(1e-12));
        CHECK(law.mean() == doctest::Approx(-0.5));
    }
    SUBCASE("pure Brownian exponent") {
        const LevyModel model(0.3, 2.0);
        const auto law = stepLaw(model, 0.25);
        CHECK(law.logMgf(1.0) == doctest::Approx(0.25 * (0.3 + 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("sampled steps match the analytic moments") {
    const LevyModel model(-0.2, 0.5, LevyJumps{0.8, JumpLaw::uniform(0.0, 1.0)});
    const auto law = stepLaw(model, 0.5);
    Rng rng(123);
    double sum = 0.0, sumSq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = law.draw(rng);
        sum += x;
        sumSq += x * x;
    }
    const double mean = sum / n;
    CHECK(mean == doctest::Approx(law.mean()).epsilon(0.05));
    // variance from the exponent: sigma^2 dt + rate dt E J^2
    const double var = 0.25 * 0.5 + 0.8 * 0.5 * (1.0 / 3.0);
    CHECK(sumSq / n - mean * mean == doctest::Approx(var).epsilon(0.05));
}

TEST_CASE("regularity of zero for the positive half-line") {
    CHECK(regularityOfZero(LevyModel(-3.0, 1.0)) == Regularity::Regular);
    CHECK(regularityOfZero(LevyModel(-1.0, 0.0, LevyJumps{0.5, JumpLaw::constant(1.0)})) ==
          Regularity::Irregular);
    CHECK(regularityOfZero(LevyModel(1.0, 0.0, LevyJumps{0.5, JumpLaw::constant(-1.0)})) ==
          Regularity::Regular);
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(LevyModel(-1.0, 0.0), DegenerateLaw); // never enters (0, inf)
    CHECK_THROWS_AS(LevyModel(0.0, 0.0, LevyJumps{0.5, JumpLaw::constant(-1.0)}), DegenerateLaw);
    CHECK_NOTHROW(LevyModel(0.0, 0.0, LevyJumps{0.5, JumpLaw::uniform(-1.0, 1.0)}));
}

TEST_CASE("dyadic thresholds rise toward the continuous one") {
    const LevyModel model(0.0, 1.0);
    const auto f = RewardFunction::indicator(0.0);
    SolverOptions base;
    base.tol = 0.01;
    base.confidence = 0.999;
    base.mc.seed = 31;
    const ThresholdSequence seq = thresholdSequence(model, f, 0.5, 4, 5000, base);
    REQUIRE(seq.levels.size() == 5);
    for (std::size_t i = 1; i < seq.levels.size(); ++i) {
        const double slack = 4.0 * (seq.levels[i].tolerance + seq.levels[i - 1].tolerance) + 1e-9;
        CHECK(seq.levels[i].u >= seq.levels[i - 1].u - slack);
    }
    CHECK(std::abs(seq.extrapolated) <= 0.05);
    CHECK(seq.levels.back().u <= 0.02); // dyadic rules stop no later than the continuous one
}

TEST_CASE("positive drift with a linear reward never stops at any level") {
    const LevyModel model(1.0, 1.0);
    const ThresholdSequence seq =
        thresholdSequence(model, RewardFunction::powerPlus(1.0), 0.0, 3, 2000);
    CHECK(seq.infinite);
    for (const auto& l : seq.levels) CHECK(l.regime == Regime::NeverStop);
}

TEST_CASE("value of the dyadic rule") {
    const LevyModel model(0.0, 1.0);
    const auto f = RewardFunction::indicator(0.0);
    const double q = 0.5;
    SUBCASE("at or above the threshold the reward is collected immediately") {
        CHECK(valueAtLevel(model, f, q, 6, 0.0, 1.5).value == 1.0);
    }
    SUBCASE("finer grids stop earlier and are worth more") {
        McOptions mc;
        mc.budget = 40000;
        mc.seed = 77;
        const Estimate v0 = valueAtLevel(model, f, q, 0, 0.0, -1.0, mc);
        mc.seed = 78;
        const Estimate v6 = valueAtLevel(model, f, q, 6, 0.0, -1.0, mc);
        CHECK(v6.value >= v0.value - 3.0 * (v0.se + v6.se));
        const double cont = std::exp(-1.0); // continuous-rule value at x = -1
        CHECK(v0.value <= cont + 3.0 * v0.se);
        CHECK(v6.value <= cont + 3.0 * v6.se);
    }
}

TEST_CASE("Brownian indicator value across discounts") {
    // continuous value at x = -1 is e^{-sqrt(2q)}
    const LevyModel model(0.0, 1.0);
    const auto f = RewardFunction::indicator(0.0);
    struct Case {
        double q;
        long budget;
    };
    for (const Case c : {Case{0.125, 20000}, Case{2.0, 40000}}) {
        McOptions mc;
        mc.budget = c.budget;
        mc.seed = 400 + static_cast<std::uint64_t>(c.q * 8);
        const Estimate v = valueAtLevel(model, f, c.q, 10, 0.0, -1.0, mc);
        const double target = std::exp(-std::sqrt(2.0 * c.q));
        CHECK(std::abs(v.value - target) <= std::max(0.01, 4.0 * v.se));
    }
}

TEST_CASE("degenerate log-linear instance reproduces the exponential value") {
    const LevyModel model(-1.0, 0.0, LevyJumps{0.5, JumpLaw::constant(1.0)});
    const double lambda = stepLaw(model, 1.0).mgfRoot(0.0).value();
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
    const auto f = RewardFunction::custom(h, hp, hp, -std::numeric_limits<double>::infinity(), 0.0,
                                          true, 2.0 * lambda);
    McOptions mc;
    mc.budget = 60000;
    for (double x : {-0.25, -0.5, -1.0}) {
        mc.seed = 500 + static_cast<std::uint64_t>(-x * 16);
        const Estimate v = valueAtLevel(model, f, 0.0, 10, 0.0, x, mc);
        CHECK(std::abs(v.value - std::exp(lambda * x)) <= 4.0 * v.se + 2e-3);
    }
}

TEST_CASE("event-driven dyadic kernel agrees with per-step sampling") {
    const LevyModel model(-1.0, 0.0, LevyJumps{0.5, JumpLaw::constant(1.0)});
    const int level = 3;
    const double dt = std::ldexp(1.0, -level);
    const double q = 0.2;
    McOptions mc;
    mc.budget = 30000;
    mc.seed = 5150;
    const ReturnKernel fast = dyadicReturnKernel(model, q, level, mc);
    mc.seed = 5151;
    const ReturnKernel slow = mcReturnKernel(stepLaw(model, dt), q * dt, mc);
    const auto f = RewardFunction::powerPlus(1.0);
    for (double x : {0.5, 1.0, 2.0}) {
        const Estimate a = ratioFromKernel(fast, f, x);
        const Estimate b = ratioFromKernel(slow, f, x);
        CHECK(std::abs(a.value - b.value) <= 4.0 * (a.se + b.se) + 1e-9);
    }
}
