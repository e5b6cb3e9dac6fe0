#pragma once

#include "optstop/levy.hpp"
#include "optstop/solver.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace optstop {

enum class Task { Solve, OracleCheck, LevySequence, SmoothFit, Classify, Bench };

struct NumericsSpec {
    std::uint64_t seed = 0x5EED5EEDull;
    long budget = 200000;
    double tolerance = 1e-6;
    double confidence = 0.99;
    std::optional<std::pair<double, double>> bracket;
    std::optional<std::pair<double, double>> grid; // oracle grid
    int levels = 8;                                // dyadic levels for sequences
    std::vector<double> levelSchedule;             // never-stop probe levels
    std::optional<std::vector<double>> outputGrid; // value.csv sample points; unset = default band
    unsigned threads = 0;
};

/// One batch problem: a reward, a driving process, a discount and a task.
struct ProblemSpec {
    ProblemSpec(RewardFunction r, std::variant<IncrementLaw, LevyModel> p)
        : reward(std::move(r)), process(std::move(p)) {}

    RewardFunction reward;
    std::variant<IncrementLaw, LevyModel> process;
    double q = 0.0;
    Task task = Task::Solve;
    NumericsSpec numerics;
};

/// Parses and validates the JSON problem description (throws SchemaError on
/// malformed input; construction errors from the domain types propagate).
ProblemSpec parseProblemSpec(const std::string& jsonText);

struct RunOptions {
    std::string outDir;
    bool emitPlots = false; // tab-separated plot files alongside the CSVs
};

struct RunResult {
    int exitCode = 0; // 0 success, 2 inconclusive; errors throw
    std::string summary;
    std::vector<std::string> filesWritten;
};

/// Executes the task and writes report.json plus task-specific CSV files
/// into outDir (atomically: write-temp, rename). Every report embeds the
/// numeric options and seed it was produced with.
RunResult runProblem(const ProblemSpec& spec, const RunOptions& options);

/// Minimal structural validation of an emitted report (presence and types of
/// the required fields). Returns an empty string when valid, else the first
/// problem found.
std::string validateReportText(const std::string& reportJson);

} // namespace optstop
