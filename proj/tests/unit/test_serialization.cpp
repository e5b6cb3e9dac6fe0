#include "optstop/errors.hpp"
#include "optstop/serialization.hpp"

#include <doctest.h>

#include <cmath>

using namespace optstop;

TEST_CASE("reward JSON round trips") {
    const RewardFunction rewards[] = {
        RewardFunction::powerPlus(1.5),
        RewardFunction::expCall(2.0),
        RewardFunction::expPut(2.0),
        RewardFunction::indicator(-0.5),
        RewardFunction::expLinear(0.2, 0.7),
        RewardFunction::piecewiseLogLinear({-1.0, 1.0}, {2.0, 1.0, 0.25}, 0.0, 0.3, -2.0),
        RewardFunction::expCall(1.0).truncateAbove(3.0).scaled(2.0),
    };
    for (const auto& f : rewards) {
        const auto g = rewardFromJsonText(toJsonText(f));
        for (double x : {-3.0, -0.6, 0.0, 0.4, 1.7, 5.0}) {
            CHECK(g.eval(x) == doctest::Approx(f.eval(x)).epsilon(1e-12));
        }
        CHECK(g.asymptoticSlope() == doctest::Approx(f.asymptoticSlope()));
        CHECK(g.leftEdge() == f.leftEdge());
    }
}

TEST_CASE("custom rewards refuse to serialize") {
    const auto f = RewardFunction::custom([](double x) { return x; }, [](double) { return 1.0; },
                                          [](double) { return 1.0; },
                                          -std::numeric_limits<double>::infinity(), 1.0, true);
    CHECK_THROWS_AS(toJsonText(f), Unsupported);
}

TEST_CASE("law JSON round trips") {
    const auto lattice = IncrementLaw::lattice(0.5, {{-1.0, 0.5}, {0.5, 0.3}, {1.0, 0.2}});
    const auto lat2 = lawFromJsonText(toJsonText(lattice));
    CHECK(lat2.isLattice());
    CHECK(lat2.step() == doctest::Approx(0.5));
    CHECK(lat2.mean() == doctest::Approx(lattice.mean()));

    const auto gauss = IncrementLaw::gaussian(-0.3, 1.2);
    const auto g2 = lawFromJsonText(toJsonText(gauss));
    CHECK(g2.mean() == doctest::Approx(-0.3));
    CHECK(g2.logMgf(1.0) == doctest::Approx(gauss.logMgf(1.0)));

    const auto jd = IncrementLaw::jumpDiffusionStep(-1.0, 0.5, 0.8, JumpLaw::uniform(0.0, 1.0));
    const auto jd2 = lawFromJsonText(toJsonText(jd));
    CHECK(jd2.logMgf(0.7) == doctest::Approx(jd.logMgf(0.7)).epsilon(1e-12));
}

TEST_CASE("model JSON round trips") {
    const LevyModel m(-1.0, 0.5, LevyJumps{0.5, JumpLaw::exponential(2.0)});
    const LevyModel m2 = modelFromJsonText(toJsonText(m));
    CHECK(m2.drift() == doctest::Approx(-1.0));
    CHECK(m2.sigma() == doctest::Approx(0.5));
    REQUIRE(m2.jumps().has_value());
    CHECK(m2.jumps()->rate == doctest::Approx(0.5));
}

TEST_CASE("schema violations carry the field") {
    CHECK_THROWS_AS(rewardFromJsonText(R"({"kind":"power_plus"})"), SchemaError);
    CHECK_THROWS_AS(rewardFromJsonText(R"({"kind":"no_such_kind","nu":1})"), SchemaError);
    CHECK_THROWS_AS(lawFromJsonText(R"({"mode":"lattice"})"), SchemaError);
}

TEST_CASE("infinite markers survive the trip") {
    const auto f = rewardFromJsonText(
        R"({"kind":"piecewise_log_linear","breakpoints":[0.0],"slopes":[1.0,0.5],
            "anchor_x":0.0,"anchor_logvalue":0.0,"x0":"-inf"})");
    CHECK(std::isinf(f.leftEdge()));
    CHECK(f.leftEdge() < 0.0);
}
