#include "optstop/errors.hpp"
#include "optstop/problem.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace optstop;

namespace {

std::string readFile(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::filesystem::path freshDir(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / "optstop_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

const char* kReferenceSpec = R"({
  "task": "solve",
  "q": 0.0,
  "reward": {"kind": "power_plus", "nu": 1.0},
  "process": {"mode": "lattice", "step": 1.0, "atoms": [[1.0, 0.25], [-1.0, 0.75]]},
  "numerics": {"seed": 42, "tolerance": 1e-6, "output_grid": [-2.0, -1.0, 0.0, 1.0, 2.0]}
})";

} // namespace

TEST_CASE("solve task writes a report and value table") {
    const auto dir = freshDir("solve");
    const ProblemSpec spec = parseProblemSpec(kReferenceSpec);
    const RunResult r = runProblem(spec, {dir.string(), false});
    CHECK(r.exitCode == 0);

    const std::string report = readFile(dir / "report.json");
    CHECK(validateReportText(report).empty());
    CHECK(report.find("\"regime\": \"finite\"") != std::string::npos);

    const std::string values = readFile(dir / "value.csv");
    // row for x = 0 carries V(0) = 1/3
    CHECK(values.find("0,0,0.3333333") != std::string::npos);
    CHECK(readFile(dir / "ratio.csv").rfind("x,rho,se", 0) == 0);
}

TEST_CASE("reports are bit-identical across reruns with the same seed") {
    const auto dirA = freshDir("repro_a");
    const auto dirB = freshDir("repro_b");
    const ProblemSpec spec = parseProblemSpec(kReferenceSpec);
    runProblem(spec, {dirA.string(), false});
    runProblem(spec, {dirB.string(), false});
    CHECK(readFile(dirA / "report.json") == readFile(dirB / "report.json"));
    CHECK(readFile(dirA / "value.csv") == readFile(dirB / "value.csv"));
}

TEST_CASE("classify task exit codes") {
    const auto dir = freshDir("classify");
    ProblemSpec spec = parseProblemSpec(R"({
      "task": "classify", "q": 0.0,
      "reward": {"kind": "power_plus", "nu": 1.0},
      "process": {"mode": "lattice", "step": 1.0, "atoms": [[1.0, 0.5], [-1.0, 0.5]]}
    })");
    const RunResult r = runProblem(spec, {dir.string(), false});
    CHECK(r.exitCode == 0);
    CHECK(readFile(dir / "report.json").find("infinite") != std::string::npos);
}

TEST_CASE("oracle task cross-validates") {
    const auto dir = freshDir("oracle");
    ProblemSpec spec = parseProblemSpec(kReferenceSpec);
    spec.task = Task::OracleCheck;
    const RunResult r = runProblem(spec, {dir.string(), false});
    CHECK(r.exitCode == 0);
    const std::string report = readFile(dir / "report.json");
    CHECK(report.find("\"pass\": true") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "dp.csv"));
}

TEST_CASE("malformed rewards are rejected with the contract named") {
    const char* bad = R"({
      "task": "solve", "q": 0.1,
      "reward": {"kind": "piecewise_log_linear", "breakpoints": [0.0],
                 "slopes": [0.5, 2.0], "anchor_x": 0.0, "anchor_logvalue": 0.0},
      "process": {"mode": "lattice", "step": 1.0, "atoms": [[1.0, 0.5], [-1.0, 0.5]]}
    })";
    try {
        parseProblemSpec(bad);
        FAIL("expected a construction error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("logconcave") != std::string::npos);
    }
}

TEST_CASE("exactly one process kind is accepted") {
    const char* both = R"({
      "task": "solve", "q": 0.1,
      "reward": {"kind": "power_plus", "nu": 1.0},
      "process": {"mode": "lattice", "drift": -1.0}
    })";
    CHECK_THROWS_AS(parseProblemSpec(both), SchemaError);
}

TEST_CASE("plot emission mirrors the column files") {
    const auto dir = freshDir("plots");
    const ProblemSpec spec = parseProblemSpec(kReferenceSpec);
    const RunResult r = runProblem(spec, {dir.string(), true});
    CHECK(r.exitCode == 0);
    const std::string tsv = readFile(dir / "value.tsv");
    CHECK(tsv.rfind("x\tg\tV", 0) == 0);
}

TEST_CASE("an explicitly empty output grid gives header-only tables") {
    const auto dir = freshDir("emptygrid");
    ProblemSpec spec = parseProblemSpec(kReferenceSpec);
    spec.numerics.outputGrid = std::vector<double>{};
    const RunResult r = runProblem(spec, {dir.string(), true});
    CHECK(r.exitCode == 0);
    CHECK(readFile(dir / "value.csv") == "x,g,V\n");
    CHECK(readFile(dir / "value.tsv") == "x\tg\tV\n");
}
