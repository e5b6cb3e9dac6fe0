#include "optstop/errors.hpp"
#include "optstop/first_passage.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace optstop;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

IncrementLaw upDown(double pUp) {
    return IncrementLaw::lattice(1.0, {{1.0, pUp}, {-1.0, 1.0 - pUp}});
}
} // namespace

TEST_CASE("skip-free first return: 0.5 x + 0.25") {
    // one step up lands at x+1 with probability 1/4; one step down re-ascends
    // to exactly x with probability (1/4)/(3/4) = 1/3
    const auto law = upDown(0.25);
    const auto f = RewardFunction::powerPlus(1.0);
    for (double x : {1.0, 2.0, 5.0}) {
        const double v = firstPassageExact(law, f, 0.0, x, x, PassageKind::StrictReturn);
        CHECK(v == doctest::Approx(0.5 * x + 0.25).epsilon(1e-10));
    }
}

TEST_CASE("discounted return time is below its one-step bound") {
    const auto law = upDown(0.25);
    const auto f = RewardFunction::indicator(0.0);
    const double v = firstPassageExact(law, f, 0.1, 0.0, 0.0, PassageKind::StrictReturn);
    CHECK(v < 1.0);
    CHECK(v <= std::exp(-0.1) + 1e-12); // T >= 1 and the payoff is at most 1

    McOptions mc;
    mc.budget = 100000;
    const PassageEstimate est = firstPassageMC(law, f, 0.1, 0.0, 0.0, PassageKind::StrictReturn, mc);
    CHECK(std::abs(est.value - v) <= 3.0 * est.se);
}

TEST_CASE("entry at or above the level stops immediately") {
    const auto law = upDown(0.25);
    const auto f = RewardFunction::powerPlus(1.0);
    CHECK(firstPassageExact(law, f, 0.3, 1.0, 2.5, PassageKind::Entry) == doctest::Approx(2.5));
    McOptions mc;
    mc.budget = 10;
    CHECK(firstPassageMC(law, f, 0.3, 1.0, 2.5, PassageKind::Entry, mc).value ==
          doctest::Approx(2.5));
}

TEST_CASE("Monte Carlo matches the exact solve") {
    const auto law = upDown(0.25);
    const auto f = RewardFunction::powerPlus(1.0);
    McOptions mc;
    mc.budget = 100000;
    const PassageEstimate est = firstPassageMC(law, f, 0.0, 1.0, 1.0, PassageKind::StrictReturn, mc);
    CHECK(std::abs(est.value - 0.75) <= 3.0 * est.se);
}

TEST_CASE("Gaussian drift-down indicator estimate stays below one") {
    const auto law = IncrementLaw::gaussian(-0.5, 1.0);
    const auto f = RewardFunction::indicator(0.0);
    McOptions mc;
    mc.budget = 50000;
    const PassageEstimate est = firstPassageMC(law, f, 0.0, 0.0, 0.0, PassageKind::StrictReturn, mc);
    CHECK(est.value < 1.0);
    CHECK(est.value > 0.0);
}

TEST_CASE("degenerate budgets") {
    const auto law = upDown(0.25);
    const auto f = RewardFunction::powerPlus(1.0);
    McOptions mc;
    mc.budget = 0;
    CHECK_THROWS_AS(firstPassageMC(law, f, 0.0, 1.0, 1.0, PassageKind::StrictReturn, mc),
                    PreconditionViolation);
    mc.budget = 1;
    const PassageEstimate one = firstPassageMC(law, f, 0.0, 1.0, 1.0, PassageKind::StrictReturn, mc);
    CHECK(std::isinf(one.se)); // single path: spread unknowable
}

TEST_CASE("zero discount without drift needs the regime settled first") {
    const auto law = IncrementLaw::lattice(1.0, {{-2.0, 0.5}, {2.0, 0.5}});
    const auto f = RewardFunction::powerPlus(1.0);
    CHECK_THROWS_AS(firstPassageExact(law, f, 0.0, 1.0, 0.0, PassageKind::Entry),
                    UnboundedExpectation);
    McOptions mc;
    CHECK_THROWS_AS(firstPassageMC(law, f, 0.0, 1.0, 0.0, PassageKind::Entry, mc),
                    PreconditionViolation);
}

TEST_CASE("single passage samples respect the contract") {
    const auto law = upDown(0.25);
    Rng rng(314);
    long finiteCount = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto s = sampleFirstPassage(law, 0.1, 0.5, 0.0, PassageKind::Entry, rng);
        if (!s.finite) continue;
        ++finiteCount;
        CHECK(s.position >= 0.5); // at or above the level when finite
        CHECK(s.time >= 1);
        CHECK(s.discountWeight == doctest::Approx(std::exp(-0.1 * s.time)));
    }
    CHECK(finiteCount > 100);
    CHECK(finiteCount < 2000); // negative drift loses some paths
    // already at or above the level: time zero
    const auto s0 = sampleFirstPassage(law, 0.1, 0.5, 2.0, PassageKind::Entry, rng);
    CHECK(s0.finite);
    CHECK(s0.time == 0);
    CHECK(s0.discountWeight == 1.0);
}

TEST_CASE("exact return kernel of the quarter-up walk") {
    const auto kernel = exactReturnKernel(upDown(0.25), 0.0);
    REQUIRE(kernel.exact);
    REQUIRE(kernel.weight.size() == 2);
    CHECK(kernel.overshoot[0] == 0.0);
    CHECK(kernel.weight[0] == doctest::Approx(0.25).epsilon(1e-10)); // 0.75 * 1/3
    CHECK(kernel.overshoot[1] == 1.0);
    CHECK(kernel.weight[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("expected all-time maximum") {
    SUBCASE("skip-free geometric ladder") {
        CHECK(expectedMaximum(upDown(0.25)).value == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(expectedMaximum(IncrementLaw::lattice(1.0, {{-1.0, 0.99}, {1.0, 0.01}})).value ==
              doctest::Approx(1.0 / 98.0).epsilon(1e-10));
    }
    SUBCASE("nonnegative mean means an infinite maximum") {
        CHECK(expectedMaximum(upDown(0.5)).value == kInf);
    }
    SUBCASE("general lattice via the return kernel") {
        const auto law = IncrementLaw::lattice(1.0, {{-1.0, 0.7}, {2.0, 0.3}}); // mean -0.1
        const Estimate exact = expectedMaximum(law);
        CHECK(std::isfinite(exact.value));
        // ladder-epoch identity: E M = E[X_T; T < inf] / P(T = inf)
        const auto kernel = exactReturnKernel(law, 0.0);
        double a = 0.0, p = 0.0;
        for (std::size_t i = 0; i < kernel.weight.size(); ++i) {
            a += kernel.weight[i] * kernel.overshoot[i];
            p += kernel.weight[i];
        }
        CHECK(exact.value == doctest::Approx(a / (1.0 - p)).epsilon(1e-12));
    }
    SUBCASE("formula versus simulation across the up-probability sweep") {
        for (double p = 0.05; p < 0.46; p += 0.1) {
            const double formula = p / (1.0 - 2.0 * p);
            CHECK(expectedMaximum(upDown(p)).value == doctest::Approx(formula).epsilon(1e-10));
            // sampler route with the same distribution exercises the ladder
            // fixed-point estimator
            auto draw = [p](Rng& rng) { return rng.u01() < p ? 1.0 : -1.0; };
            auto logMgf = [p](double l) {
                return std::log(p * std::exp(l) + (1.0 - p) * std::exp(-l));
            };
            const auto sampler =
                IncrementLaw::sampler(draw, 2.0 * p - 1.0, logMgf, kInf, p, "pm1 sampler");
            McOptions mc;
            mc.budget = 40000;
            mc.seed = 99 + static_cast<std::uint64_t>(p * 100);
            const Estimate sim = expectedMaximum(sampler, mc);
            CHECK(std::abs(sim.value - formula) <= 4.0 * sim.se + 1e-9);
        }
    }
}

TEST_CASE("exact and Monte Carlo agree on a randomized suite") {
    Rng rng(2024);
    int done = 0;
    while (done < 50) {
        // small negative-drift lattice laws with random rewards
        const double pUp = 0.05 + 0.4 * rng.u01();
        const double step = rng.u01() < 0.5 ? 0.5 : 1.0;
        std::vector<std::pair<double, double>> atoms = {{step, pUp}, {-step, 1.0 - pUp}};
        if (rng.u01() < 0.5) {
            atoms = {{step, pUp}, {-step, (1.0 - pUp) * 0.6}, {-2.0 * step, (1.0 - pUp) * 0.4}};
        }
        const auto law = IncrementLaw::lattice(step, atoms);
        const double q = rng.u01() < 0.3 ? 0.0 : 0.4 * rng.u01();
        const RewardFunction f = rng.u01() < 0.5
                                     ? RewardFunction::powerPlus(1.0 + rng.u01())
                                     : RewardFunction::indicator(-0.5 + rng.u01());
        const double start = -1.0 + 2.0 * rng.u01();
        const double level = start + step * std::ceil(3.0 * rng.u01());
        double exact;
        try {
            exact = firstPassageExact(law, f, q, level, start, PassageKind::Entry);
        } catch (const UnboundedExpectation&) {
            continue;
        }
        McOptions mc;
        mc.budget = 20000;
        mc.seed = 1000 + static_cast<std::uint64_t>(done);
        const PassageEstimate est = firstPassageMC(law, f, q, level, start, PassageKind::Entry, mc);
        CHECK(std::abs(est.value - exact) <= 4.0 * est.se + 1e-9);
        ++done;
    }
}

TEST_CASE("batched entry values agree with single solves") {
    const auto law = upDown(0.25);
    const auto f = RewardFunction::powerPlus(1.0);
    const std::vector<double> xs = {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0};
    const auto batch = firstPassageExactBatch(law, f, 0.1, 0.5, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double single = firstPassageExact(law, f, 0.1, 0.5, xs[i], PassageKind::Entry);
        CHECK(batch[i] == doctest::Approx(single).epsilon(1e-12));
    }
}
