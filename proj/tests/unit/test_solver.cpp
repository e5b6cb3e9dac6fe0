#include "optstop/errors.hpp"
#include "optstop/solver.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace optstop;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

IncrementLaw upDown(double pUp) {
    return IncrementLaw::lattice(1.0, {{1.0, pUp}, {-1.0, 1.0 - pUp}});
}
} // namespace

TEST_CASE("one-step ratio on the quarter-up walk") {
    const auto law = upDown(0.25);
    const auto f = RewardFunction::powerPlus(1.0);
    // kernel mass 1/4 at overshoot 0 and 1/4 at overshoot 1
    CHECK(oneStepRatio(law, f, 0.0, 0.25).value == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(oneStepRatio(law, f, 0.0, 1.0).value == doctest::Approx(0.75).epsilon(1e-10));
    // a / 0 := inf for a >= 0
    CHECK(oneStepRatio(upDown(0.5), RewardFunction::indicator(0.0), 0.2, -1.0).value == kInf);
}

TEST_CASE("threshold location on the reference walk") {
    SolverOptions opts;
    opts.tol = 1e-6;
    const auto sol = findThreshold(upDown(0.25), RewardFunction::powerPlus(1.0), 0.0, opts);
    REQUIRE(sol.regime == Regime::Finite);
    CHECK(std::abs(sol.u - 0.5) <= 1e-5);
    CHECK(sol.method == SolveMethod::ExactLattice);
}

TEST_CASE("driftless walk never stops") {
    const auto sol = findThreshold(upDown(0.5), RewardFunction::powerPlus(1.0), 0.0);
    REQUIRE(sol.regime == Regime::NeverStop);
    CHECK(std::isinf(sol.w));
    CHECK(sol.wDiverged);
    CHECK(sol.beta == 0.0);
}

TEST_CASE("strong discount with a log-linear reward stops everywhere") {
    // e^{-q} mgf(1) = e^{-0.7} cosh(1) < 1
    const auto sol = findThreshold(upDown(0.5), RewardFunction::expLinear(0.0, 1.0), 0.7);
    CHECK(sol.regime == Regime::StopEverywhere);
    CHECK(sol.u == -kInf);
}

TEST_CASE("threshold-rule values") {
    const auto law = upDown(0.25);
    const auto f = RewardFunction::powerPlus(1.0);
    CHECK(valueWithThreshold(law, f, 0.0, 0.5, 0.0).value ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(valueWithThreshold(law, f, 0.0, -kInf, -2.0).value == f.eval(-2.0));
    CHECK(valueWithThreshold(law, f, 0.0, 0.5, 2.0).value == f.eval(2.0));
}

TEST_CASE("never-stop level iterates") {
    SUBCASE("linear growth certifies an infinite supremum") {
        const double levels[] = {10.0, 20.0, 40.0};
        const auto r = neverStopValue(upDown(0.5), RewardFunction::powerPlus(1.0), 0.0, levels);
        CHECK(r.diverged);
        CHECK(std::isinf(r.w));
        REQUIRE(r.iterates.size() == 3);
        CHECK(r.iterates[0] == doctest::Approx(10.0));
        CHECK(r.iterates[1] == doctest::Approx(20.0));
        CHECK(r.iterates[2] == doctest::Approx(40.0));
    }
    SUBCASE("finite-threshold instances are rejected") {
        const double levels[] = {10.0, 20.0, 40.0};
        CHECK_THROWS_AS(
            neverStopValue(upDown(0.25), RewardFunction::powerPlus(1.0), 0.0, levels),
            PreconditionViolation);
    }
    SUBCASE("a tuned martingale keeps every iterate at one") {
        // e^{-q n + X_n} is a martingale at q = log cosh 1
        const double q = std::log(std::cosh(1.0));
        const double levels[] = {5.0, 10.0, 15.0, 20.0};
        const auto r = neverStopValue(upDown(0.5), RewardFunction::expLinear(0.0, 1.0), q, levels);
        CHECK_FALSE(r.diverged);
        for (double it : r.iterates) CHECK(it == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(r.w == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("end-to-end solve on the reference instances") {
    SUBCASE("quarter-up walk with the linear reward") {
        SolverOptions opts;
        opts.tol = 1e-7;
        const Solution sol = solve(upDown(0.25), RewardFunction::powerPlus(1.0), 0.0, opts);
        REQUIRE(sol.threshold.regime == Regime::Finite);
        CHECK(std::abs(sol.threshold.u - 0.5) <= 1e-6);
        CHECK(sol.value(0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
        CHECK(sol.value(1.0) == doctest::Approx(1.0));
        CHECK(sol.value(7.3) == doctest::Approx(7.3));
    }
    SUBCASE("indicator reward stops exactly at its edge") {
        const Solution sol = solve(upDown(0.5), RewardFunction::indicator(0.0), 0.2);
        REQUIRE(sol.threshold.regime == Regime::Finite);
        CHECK(sol.threshold.u == 0.0); // clamped to the positivity edge
        const double vBelow = sol.value(-1.0);
        CHECK(vBelow > 0.0);
        CHECK(vBelow < 1.0);
        CHECK(sol.value(0.0) == 1.0);
        // the value may jump at the edge; the left limit is reported
        REQUIRE(sol.leftValueAtThreshold.has_value());
        CHECK(*sol.leftValueAtThreshold < 1.0);
    }
    SUBCASE("never-stop value is reported symbolically") {
        const Solution sol = solve(upDown(0.5), RewardFunction::powerPlus(1.0), 0.0);
        REQUIRE(sol.threshold.regime == Regime::NeverStop);
        CHECK(std::isinf(sol.value(0.0)));
    }
}

TEST_CASE("solver invariants on the reference instance") {
    SolverOptions opts;
    opts.tol = 1e-9;
    const auto law = upDown(0.25);
    const auto f = RewardFunction::powerPlus(1.0);
    const Solution sol = solve(law, f, 0.0, opts);
    const double u = sol.threshold.u;

    SUBCASE("ratio trace is nonincreasing in x") {
        auto trace = sol.threshold.ratioTrace;
        std::sort(trace.begin(), trace.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
        for (std::size_t i = 1; i < trace.size(); ++i) {
            if (std::isinf(trace[i - 1].rho)) continue;
            CHECK(trace[i].rho <= trace[i - 1].rho + 1e-10);
        }
    }
    SUBCASE("fixed point at the interior threshold") {
        CHECK(std::abs(oneStepRatio(law, f, 0.0, u).value - 1.0) <= 1e-7);
    }
    SUBCASE("dominance, equality above, ratio monotone") {
        std::vector<double> grid;
        for (int i = -20; i <= 20; ++i) grid.push_back(0.5 * i);
        const auto values = sol.value.profile(grid);
        double prevRatio = kInf;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double g = f.eval(grid[i]);
            CHECK(values[i].value >= g - 1e-12);
            if (grid[i] >= u) CHECK(values[i].value == doctest::Approx(g).epsilon(1e-12));
            if (g > 0.0) {
                const double r = values[i].value / g;
                CHECK(r <= prevRatio * (1.0 + 1e-10) + 1e-12);
                prevRatio = r;
            }
        }
    }
    SUBCASE("excessivity of the value on interior lattice points") {
        std::vector<double> grid;
        for (int i = -30; i <= 30; ++i) grid.push_back(static_cast<double>(i));
        const auto values = sol.value.profile(grid);
        for (std::size_t i = 2; i + 2 < grid.size(); ++i) {
            double cont = 0.0;
            for (const auto& a : law.atoms())
                cont += a.p * values[i + static_cast<std::size_t>(a.k)].value;
            CHECK(values[i].value >= cont - 1e-8);
        }
    }
}

TEST_CASE("threshold equals the expected maximum for linear rewards at zero discount") {
    const IncrementLaw laws[] = {
        upDown(0.25),
        upDown(0.4),
        IncrementLaw::lattice(1.0, {{-1.0, 0.7}, {2.0, 0.3}}),
        IncrementLaw::lattice(0.5, {{-1.0, 0.4}, {-0.5, 0.3}, {0.5, 0.3}}),
    };
    for (const auto& law : laws) {
        SolverOptions opts;
        opts.tol = 1e-8;
        const auto sol = findThreshold(law, RewardFunction::powerPlus(1.0), 0.0, opts);
        REQUIRE(sol.regime == Regime::Finite);
        const Estimate em = expectedMaximum(law);
        CHECK(std::abs(sol.u - em.value) <= 1e-6);
    }
}

TEST_CASE("forced Monte Carlo agrees with the exact route") {
    SolverOptions exact;
    exact.tol = 1e-7;
    SolverOptions mc;
    mc.forceMonteCarlo = true;
    mc.tol = 0.01;
    mc.mc.budget = 60000;
    mc.mc.seed = 77;
    const auto law = upDown(0.25);
    const auto f = RewardFunction::powerPlus(1.0);
    const auto a = findThreshold(law, f, 0.0, exact);
    const auto b = findThreshold(law, f, 0.0, mc);
    REQUIRE(a.regime == Regime::Finite);
    REQUIRE(b.regime == Regime::Finite);
    CHECK(std::abs(a.u - b.u) <= 0.08);
    CHECK(b.method == SolveMethod::MonteCarlo);
}
