#include "optstop/errors.hpp"
#include "optstop/reward.hpp"
#include "optstop/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace optstop;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("eval on the analytic kinds") {
    CHECK(RewardFunction::powerPlus(1.0).eval(2.0) == doctest::Approx(2.0));
    CHECK(RewardFunction::powerPlus(1.0).eval(-1.0) == 0.0);
    CHECK(RewardFunction::expCall(1.0).eval(0.0) == 0.0); // (e^0 - 1)^+ = 0
    CHECK(RewardFunction::expCall(1.0).eval(1.0) == doctest::Approx(std::exp(1.0) - 1.0));
    CHECK(RewardFunction::indicator(0.0).eval(-0.5) == 0.0);
    CHECK(RewardFunction::indicator(0.0).eval(0.0) == 1.0); // right-continuous jump at the edge
    CHECK(RewardFunction::expPut(2.0).eval(50.0) == doctest::Approx(2.0));
}

TEST_CASE("one-sided log slopes") {
    const auto power = RewardFunction::powerPlus(2.0);
    CHECK(power.logDerivLeft(4.0) == doctest::Approx(0.5)); // nu / x
    CHECK(power.logDerivRight(4.0) == doctest::Approx(0.5));

    CHECK(RewardFunction::indicator(0.0).logDerivLeft(-1.0) == kInf); // g = 0 region
    CHECK(RewardFunction::indicator(0.0).logDerivLeft(0.0) == kInf);  // jump at the edge
    CHECK(RewardFunction::indicator(0.0).logDerivRight(0.0) == 0.0);

    const auto lin = RewardFunction::expLinear(0.3, 1.0);
    CHECK(lin.logDerivLeft(-7.0) == doctest::Approx(1.0));
    CHECK(lin.logDerivRight(123.0) == doctest::Approx(1.0));
}

TEST_CASE("asymptotic slope") {
    CHECK(RewardFunction::powerPlus(3.0).asymptoticSlope() == 0.0);
    CHECK(RewardFunction::expLinear(0.0, 0.7).asymptoticSlope() == doctest::Approx(0.7));
    const auto call = RewardFunction::expCall(1.0);
    CHECK(call.asymptoticSlope() == doctest::Approx(1.0));
    // the left slope approaches the asymptotic slope from above
    CHECK(call.logDerivLeft(50.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(call.logDerivLeft(50.0) >= call.asymptoticSlope());
}

TEST_CASE("truncation clamps the argument") {
    const auto f = RewardFunction::powerPlus(1.0).truncateAbove(3.0);
    CHECK(f.eval(5.0) == doctest::Approx(3.0));
    CHECK(f.eval(2.0) == doctest::Approx(2.0));
    CHECK(f.asymptoticSlope() == 0.0);
    CHECK(f.constantTailEdge() == 3.0);
    CHECK(f.logDerivRight(3.0) == 0.0);
    CHECK(f.logDerivLeft(3.0) == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS_AS(RewardFunction::indicator(0.0).truncateAbove(-1.0), InvalidTruncation);
}

TEST_CASE("truncateAbove composed with eval equals min-composed eval") {
    Rng rng(11);
    const auto base = RewardFunction::expCall(2.0);
    const auto capped = base.truncateAbove(4.0);
    for (int i = 0; i < 200; ++i) {
        const double x = -10.0 + 30.0 * rng.u01();
        CHECK(capped.eval(x) == doctest::Approx(base.eval(std::min(x, 4.0))).epsilon(1e-14));
    }
}

TEST_CASE("piecewise log-linear form") {
    // min(e^{2x}, 1)
    const auto f = RewardFunction::piecewiseLogLinear({0.0}, {2.0, 0.0}, 0.0, 0.0);
    CHECK(f.eval(0.0) == doctest::Approx(1.0));
    CHECK(f.eval(-1.0) == doctest::Approx(std::exp(-2.0)));
    CHECK(f.eval(3.0) == doctest::Approx(1.0));
    CHECK(f.logDerivLeft(0.0) == doctest::Approx(2.0));
    CHECK(f.logDerivRight(0.0) == 0.0);
    CHECK(f.constantTailEdge() == 0.0);

    CHECK_THROWS(RewardFunction::piecewiseLogLinear({0.0}, {1.0, 2.0}, 0.0, 0.0)); // increasing slopes
    CHECK_THROWS(RewardFunction::piecewiseLogLinear({0.0}, {0.0, 0.0}, 0.0, 0.0)); // constant
}

TEST_CASE("three-point concavity on random triples") {
    const RewardFunction rewards[] = {
        RewardFunction::powerPlus(1.7),
        RewardFunction::expCall(1.5),
        RewardFunction::expPut(2.0),
        RewardFunction::expLinear(-0.2, 0.4),
        RewardFunction::piecewiseLogLinear({-1.0, 0.5, 2.0}, {1.8, 1.1, 0.6, 0.1}, 0.0, 0.2),
        RewardFunction::expCall(1.0).truncateAbove(2.5),
    };
    Rng rng(42);
    for (const auto& f : rewards) {
        const double lo = std::isfinite(f.leftEdge()) ? f.leftEdge() + 1e-6 : -20.0;
        for (int i = 0; i < 1000; ++i) {
            double a = lo + 25.0 * rng.u01();
            double b = lo + 25.0 * rng.u01();
            double c = lo + 25.0 * rng.u01();
            if (a > b) std::swap(a, b);
            if (b > c) std::swap(b, c);
            if (a > b) std::swap(a, b);
            if (c - b < 1e-6 || b - a < 1e-6) continue;
            if (f.eval(a) <= 0.0) continue;
            const double s1 = (f.logEval(b) - f.logEval(a)) / (b - a);
            const double s2 = (f.logEval(c) - f.logEval(b)) / (c - b);
            CHECK(s1 >= s2 - 1e-12 * std::max(1.0, std::abs(s1)));
        }
    }
}

TEST_CASE("left slope is nonincreasing and eval nondecreasing") {
    const auto f = RewardFunction::piecewiseLogLinear({0.0, 1.0}, {2.0, 1.0, 0.3}, 0.0, 0.0, -0.5);
    double prevSlope = kInf;
    double prevVal = -1.0;
    for (double x = -1.0; x <= 6.0; x += 0.05) {
        const double s = f.logDerivLeft(x);
        if (std::isfinite(prevSlope)) CHECK(s <= prevSlope + 1e-12);
        if (std::isfinite(s)) prevSlope = s;
        const double v = f.eval(x);
        CHECK(v >= prevVal - 1e-15);
        prevVal = v;
        CHECK(f.logDerivLeft(x) >= f.logDerivRight(x) - 1e-12);
        CHECK(f.logDerivRight(x) >= f.asymptoticSlope() - 1e-12);
    }
}

TEST_CASE("custom rewards are probed at construction") {
    // valid: h = x - e^{-x}, slopes strictly above the asymptote
    auto goodH = [](double x) { return x - std::exp(-x); };
    auto goodS = [](double x) { return 1.0 + std::exp(-x); };
    CHECK_NOTHROW(RewardFunction::custom(goodH, goodS, goodS, -kInf, 1.0, true));

    // log-convex: rejected
    auto badH = [](double x) { return std::log(std::exp(x) + 1.0); };
    auto badS = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    CHECK_THROWS_AS(RewardFunction::custom(badH, badS, badS, -kInf, 0.0, false),
                    PreconditionViolation);

    // decreasing: rejected
    auto decH = [](double x) { return -x; };
    auto decS = [](double) { return -1.0; };
    CHECK_THROWS_AS(RewardFunction::custom(decH, decS, decS, -kInf, 0.0, false),
                    PreconditionViolation);
}

TEST_CASE("scaling shifts the log reward by a constant") {
    const auto f = RewardFunction::expCall(1.0);
    const auto g = f.scaled(3.0);
    CHECK(g.eval(2.0) == doctest::Approx(3.0 * f.eval(2.0)));
    CHECK(g.logDerivLeft(2.0) == f.logDerivLeft(2.0));
    CHECK(g.asymptoticSlope() == f.asymptoticSlope());
    CHECK(g.leftEdge() == f.leftEdge());
}

TEST_CASE("piecewise snapshot preserves values on the grid") {
    const auto f = RewardFunction::expCall(1.0);
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(0.1 + 0.25 * i);
    const auto snap = f.toPiecewise(grid);
    for (double x : grid) CHECK(snap.eval(x) == doctest::Approx(f.eval(x)).epsilon(1e-12));
    CHECK(snap.kind() == RewardKind::PiecewiseLogLinear);
}
