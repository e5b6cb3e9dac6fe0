#include "optstop/problem.hpp"

#include "json_codec.hpp"
#include "optstop/acceptance.hpp"
#include "optstop/dp_oracle.hpp"
#include "optstop/errors.hpp"
#include "optstop/serialization.hpp"
#include "optstop/smooth_fit.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace optstop {

namespace {

using codec::json;

constexpr const char* kToolName = "optstop";
constexpr const char* kToolVersion = "0.1.0";
constexpr int kSchemaVersion = 1;

Task taskFromName(const std::string& name) {
    if (name == "solve") return Task::Solve;
    if (name == "oracle-check" || name == "oracle") return Task::OracleCheck;
    if (name == "levy-sequence" || name == "levy") return Task::LevySequence;
    if (name == "smoothfit") return Task::SmoothFit;
    if (name == "classify") return Task::Classify;
    if (name == "bench") return Task::Bench;
    throw SchemaError("unknown task '" + name + "'");
}

const char* taskName(Task t) {
    switch (t) {
    case Task::Solve: return "solve";
    case Task::OracleCheck: return "oracle-check";
    case Task::LevySequence: return "levy-sequence";
    case Task::SmoothFit: return "smoothfit";
    case Task::Classify: return "classify";
    case Task::Bench: return "bench";
    }
    return "solve";
}

NumericsSpec numericsFromJson(const json& j) {
    NumericsSpec n;
    if (j.is_null()) return n;
    if (!j.is_object()) throw SchemaError("'numerics' must be an object");
    if (j.contains("seed")) n.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("budget")) n.budget = j["budget"].get<long>();
    if (j.contains("tolerance")) n.tolerance = j["tolerance"].get<double>();
    if (j.contains("confidence")) n.confidence = j["confidence"].get<double>();
    if (j.contains("levels")) n.levels = j["levels"].get<int>();
    if (j.contains("threads")) n.threads = j["threads"].get<unsigned>();
    auto readPair = [&](const char* key) -> std::optional<std::pair<double, double>> {
        if (!j.contains(key)) return std::nullopt;
        const json& p = j[key];
        if (!p.is_array() || p.size() != 2) throw SchemaError(std::string(key) + " must be [lo, hi]");
        return std::make_pair(p[0].get<double>(), p[1].get<double>());
    };
    n.bracket = readPair("bracket");
    n.grid = readPair("grid");
    if (j.contains("level_schedule")) n.levelSchedule = j["level_schedule"].get<std::vector<double>>();
    if (j.contains("output_grid")) n.outputGrid = j["output_grid"].get<std::vector<double>>(); // [] = no samples
    return n;
}

json numericsToJson(const NumericsSpec& n) {
    json j;
    j["seed"] = n.seed;
    j["budget"] = n.budget;
    j["tolerance"] = n.tolerance;
    j["confidence"] = n.confidence;
    j["levels"] = n.levels;
    j["threads"] = n.threads;
    if (n.bracket) j["bracket"] = {n.bracket->first, n.bracket->second};
    if (n.grid) j["grid"] = {n.grid->first, n.grid->second};
    if (!n.levelSchedule.empty()) j["level_schedule"] = n.levelSchedule;
    if (n.outputGrid) j["output_grid"] = *n.outputGrid;
    return j;
}

SolverOptions solverOptions(const NumericsSpec& n) {
    SolverOptions o;
    o.bracket = n.bracket;
    o.tol = n.tolerance;
    o.confidence = n.confidence;
    o.levelSchedule = n.levelSchedule;
    o.mc.budget = n.budget;
    o.mc.seed = n.seed;
    o.mc.threads = n.threads;
    return o;
}

void writeFileAtomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cli", "cannot open '" + tmp + "' for writing");
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

std::vector<double> defaultValueGrid(const Solution& sol, const RewardFunction& f) {
    double center = 0.0;
    if (sol.threshold.regime == Regime::Finite) center = sol.threshold.u;
    else if (std::isfinite(f.leftEdge())) center = f.leftEdge();
    std::vector<double> grid;
    for (int i = -40; i <= 40; ++i) grid.push_back(center + 0.25 * i);
    return grid;
}

struct TaskOutput {
    json results;
    int exitCode = 0;
    std::string summary;
    std::vector<std::pair<std::string, std::string>> files; // name -> content
};

TaskOutput runClassify(const ProblemSpec& spec) {
    TaskOutput out;
    FinitenessVerdict v;
    if (std::holds_alternative<IncrementLaw>(spec.process)) {
        v = lightTailCharacterization(std::get<IncrementLaw>(spec.process), spec.reward, spec.q);
    } else {
        // continuous-time model: the tests run on its unit-time law
        const IncrementLaw unit = stepLaw(std::get<LevyModel>(spec.process), 1.0);
        v = lightTailCharacterization(unit, spec.reward, spec.q);
        v.witness += " [applied to the unit-time law of the model]";
    }
    out.results["classification"] = codec::verdictToJson(v);
    out.exitCode = v.verdict == Finiteness::Inconclusive ? 2 : 0;
    out.summary = std::string("classify: ") + codec::finitenessName(v.verdict);
    return out;
}

TaskOutput runSolve(const ProblemSpec& spec) {
    if (!std::holds_alternative<IncrementLaw>(spec.process))
        throw SchemaError("task 'solve' runs on one-step laws; use 'levy-sequence' for models");
    const auto& law = std::get<IncrementLaw>(spec.process);
    const SolverOptions opts = solverOptions(spec.numerics);
    const Solution sol = solve(law, spec.reward, spec.q, opts);

    TaskOutput out;
    out.results["solution"] = codec::solutionToJson(sol.threshold);
    if (sol.leftValueAtThreshold)
        out.results["left_value_at_threshold"] = *sol.leftValueAtThreshold;
    out.exitCode = sol.threshold.regime == Regime::Inconclusive ? 2 : 0;
    out.summary = std::string("solve: ") + codec::regimeName(sol.threshold.regime);

    {
        std::ostringstream os;
        writeRatioCsv(os, sol.threshold.ratioTrace);
        out.files.emplace_back("ratio.csv", os.str());
    }
    if (sol.threshold.regime != Regime::Inconclusive) {
        const std::vector<double> grid = spec.numerics.outputGrid
                                             ? *spec.numerics.outputGrid
                                             : defaultValueGrid(sol, spec.reward);
        const auto values = sol.value.profile(grid);
        std::ostringstream os;
        writeValueCsv(os, grid, spec.reward, values);
        out.files.emplace_back("value.csv", os.str());
    }
    return out;
}

TaskOutput runOracleCheck(const ProblemSpec& spec) {
    if (!std::holds_alternative<IncrementLaw>(spec.process) ||
        !std::get<IncrementLaw>(spec.process).isLattice())
        throw SchemaError("task 'oracle-check' needs a lattice law");
    const auto& law = std::get<IncrementLaw>(spec.process);
    const SolverOptions opts = solverOptions(spec.numerics);
    const Solution sol = solve(law, spec.reward, spec.q, opts);

    TaskOutput out;
    out.results["solution"] = codec::solutionToJson(sol.threshold);
    if (sol.threshold.regime == Regime::Inconclusive) {
        out.exitCode = 2;
        out.summary = "oracle-check: solver inconclusive";
        return out;
    }

    double lo, hi;
    const double h = law.step();
    const double jumpRange = static_cast<double>(law.maxStepCount() - law.minStepCount()) * h;
    if (spec.numerics.grid) {
        lo = spec.numerics.grid->first;
        hi = spec.numerics.grid->second;
    } else {
        const double base = sol.threshold.regime == Regime::Finite ? sol.threshold.u : 0.0;
        const double alpha = std::max(law.mgfRoot(spec.q).value_or(0.05), 0.05);
        lo = base - std::max(22.0 * jumpRange, 35.0 / alpha);
        hi = base + 22.0 * jumpRange;
    }
    DpOptions dpOpts;
    dpOpts.boundary = sol.threshold.regime == Regime::Finite ? DpBoundary::GeometricExtrapolation
                                                             : DpBoundary::ClampToReward;
    dpOpts.extrapolationRate = spec.reward.asymptoticSlope();
    const DpResult dp = valueIteration(law, spec.reward, spec.q, lo, hi, dpOpts);
    const OneSidedCheck oneSided = checkOneSided(dp);
    const CrossValidation cv = crossValidate(sol, dp, h);

    out.results["dp"] = {{"iterations", dp.iterations},
                         {"residual", dp.residual},
                         {"grid_points", dp.grid.size()},
                         {"threshold", codec::encodeFinite(oneSided.threshold)},
                         {"is_up_set", oneSided.isUpSet}};
    out.results["cross_validation"] = codec::crossValidationToJson(cv);
    out.exitCode = cv.pass ? 0 : 1;
    out.summary = std::string("oracle-check: ") + (cv.pass ? "pass" : "FAIL") +
                  (cv.note.empty() ? "" : " (" + cv.note + ")");
    std::ostringstream os;
    writeDpCsv(os, dp, spec.reward);
    out.files.emplace_back("dp.csv", os.str());
    return out;
}

TaskOutput runLevySequence(const ProblemSpec& spec) {
    if (!std::holds_alternative<LevyModel>(spec.process))
        throw SchemaError("task 'levy-sequence' needs a continuous-time model");
    const auto& model = std::get<LevyModel>(spec.process);
    SolverOptions opts = solverOptions(spec.numerics);
    opts.tol = std::max(opts.tol, 1e-3);
    const ThresholdSequence seq =
        thresholdSequence(model, spec.reward, spec.q, spec.numerics.levels, spec.numerics.budget, opts);

    TaskOutput out;
    out.results["sequence"] = codec::sequenceToJson(seq);
    out.summary = "levy-sequence: " + std::to_string(seq.levels.size()) + " levels";
    std::ostringstream os;
    writeSequenceCsv(os, seq);
    out.files.emplace_back("sequence.csv", os.str());
    return out;
}

TaskOutput runSmoothFit(const ProblemSpec& spec) {
    if (!std::holds_alternative<LevyModel>(spec.process))
        throw SchemaError("task 'smoothfit' needs a continuous-time model");
    const auto& model = std::get<LevyModel>(spec.process);
    SolverOptions opts = solverOptions(spec.numerics);
    opts.tol = std::max(opts.tol, 1e-3);
    const ThresholdSequence seq =
        thresholdSequence(model, spec.reward, spec.q, spec.numerics.levels, spec.numerics.budget, opts);

    TaskOutput out;
    out.results["sequence"] = codec::sequenceToJson(seq);
    if (!std::isfinite(seq.extrapolated)) {
        out.exitCode = 2;
        out.summary = "smoothfit: no finite threshold to analyze";
        return out;
    }
    // a kinked boundary is approached from below by the dyadic estimates;
    // the smooth-fit question is about the kink itself
    const double snapTol = std::max(0.05, 4.0 * seq.levels.back().tolerance);
    const double u = refineThresholdNearKink(spec.reward, seq.extrapolated, snapTol);
    if (u != seq.extrapolated) out.results["threshold_snapped_to_kink"] = u;
    SmoothFitOptions sf;
    sf.seed = spec.numerics.seed;
    sf.threads = spec.numerics.threads;
    sf.baseBudget = std::max(spec.numerics.budget / 10, 2000L);
    sf.overshootBudget = spec.numerics.budget;
    const SmoothFitReport rep = analyzeSmoothFit(model, spec.reward, spec.q, u, sf);
    out.results["smooth_fit"] = codec::smoothFitToJson(rep);
    out.summary = std::string("smoothfit: ") +
                  (rep.verdict == SmoothFitVerdict::SmoothFitHolds ? "holds" : "fails");
    std::ostringstream os;
    writeDerivativeCsv(os, rep.leftDerivative);
    out.files.emplace_back("derivative.csv", os.str());
    return out;
}

TaskOutput runBench(const ProblemSpec& spec) {
    AcceptanceOptions a;
    a.seed = spec.numerics.seed;
    a.threads = spec.numerics.threads;
    const auto results = runAcceptanceSuite(a, true);
    TaskOutput out;
    json rows = json::array();
    bool all = true;
    for (const auto& r : results) {
        rows.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        all = all && r.pass;
    }
    out.results["bench"] = rows;
    out.exitCode = all ? 0 : 1;
    out.summary = all ? "bench: all criteria pass" : "bench: FAILURES";
    return out;
}

} // namespace

ProblemSpec parseProblemSpec(const std::string& jsonText) {
    json j;
    try {
        j = json::parse(jsonText, nullptr, true, true);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("problem spec must be a JSON object");
    if (!j.contains("task") || !j["task"].is_string()) throw SchemaError("missing 'task'");
    const Task task = taskFromName(j["task"].get<std::string>());

    if (task != Task::Bench && (!j.contains("reward") || !j.contains("process")))
        throw SchemaError("a problem needs 'reward' and 'process'");

    RewardFunction reward = RewardFunction::indicator(0.0);
    std::variant<IncrementLaw, LevyModel> process{IncrementLaw::lattice(1.0, {{1.0, 0.5}, {-1.0, 0.5}})};
    if (j.contains("reward")) reward = codec::rewardFromJson(j["reward"]);
    if (j.contains("process")) {
        const json& p = j["process"];
        if (!p.is_object()) throw SchemaError("'process' must be an object");
        const bool isLaw = p.contains("mode");
        const bool isModel = p.contains("drift");
        if (isLaw == isModel)
            throw SchemaError("'process' must be exactly one of a one-step law (mode: ...) or a "
                              "model (drift: ...)");
        if (isLaw)
            process = codec::lawFromJson(p);
        else
            process = codec::modelFromJson(p);
    }

    ProblemSpec spec(std::move(reward), std::move(process));
    spec.task = task;
    if (j.contains("q")) {
        spec.q = j["q"].get<double>();
        if (!(spec.q >= 0.0)) throw SchemaError("q must be nonnegative");
    } else if (task != Task::Bench) {
        throw SchemaError("missing 'q'");
    }
    spec.numerics = numericsFromJson(j.contains("numerics") ? j["numerics"] : json());
    return spec;
}

RunResult runProblem(const ProblemSpec& spec, const RunOptions& options) {
    namespace fs = std::filesystem;
    fs::create_directories(options.outDir);

    TaskOutput out;
    switch (spec.task) {
    case Task::Classify: out = runClassify(spec); break;
    case Task::Solve: out = runSolve(spec); break;
    case Task::OracleCheck: out = runOracleCheck(spec); break;
    case Task::LevySequence: out = runLevySequence(spec); break;
    case Task::SmoothFit: out = runSmoothFit(spec); break;
    case Task::Bench: out = runBench(spec); break;
    }

    json report;
    report["schema_version"] = kSchemaVersion;
    report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    report["task"] = taskName(spec.task);
    report["q"] = spec.q;
    if (spec.task != Task::Bench) {
        if (spec.reward.kind() != RewardKind::Custom)
            report["reward"] = codec::rewardToJson(spec.reward);
        if (std::holds_alternative<IncrementLaw>(spec.process))
            report["process"] = codec::lawToJson(std::get<IncrementLaw>(spec.process));
        else
            report["process"] = codec::modelToJson(std::get<LevyModel>(spec.process));
    }
    report["numerics"] = numericsToJson(spec.numerics);
    report["results"] = out.results;
    report["exit_code"] = out.exitCode;

    RunResult result;
    result.exitCode = out.exitCode;
    result.summary = out.summary;

    json fileList = json::array();
    for (const auto& [name, content] : out.files) fileList.push_back(name);
    report["files"] = fileList;

    writeFileAtomic((fs::path(options.outDir) / "report.json").string(), report.dump(2) + "\n");
    result.filesWritten.push_back("report.json");
    for (const auto& [name, content] : out.files) {
        writeFileAtomic((fs::path(options.outDir) / name).string(), content);
        result.filesWritten.push_back(name);
    }

    if (options.emitPlots) {
        // column files on the caller grid; an empty grid gives header-only files
        for (const auto& [name, content] : out.files) {
            if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
            std::string tsv = content;
            for (auto& ch : tsv)
                if (ch == ',') ch = '\t';
            const std::string plotName = name.substr(0, name.size() - 4) + ".tsv";
            writeFileAtomic((fs::path(options.outDir) / plotName).string(), tsv);
            result.filesWritten.push_back(plotName);
        }
    }
    return result;
}

std::string validateReportText(const std::string& reportJson) {
    json j;
    try {
        j = json::parse(reportJson);
    } catch (const std::exception& e) {
        return std::string("not valid JSON: ") + e.what();
    }
    if (!j.is_object()) return "report must be an object";
    if (!j.contains("schema_version") || !j["schema_version"].is_number())
        return "missing numeric schema_version";
    if (!j.contains("tool") || !j["tool"].is_object() || !j["tool"].contains("name") ||
        !j["tool"].contains("version"))
        return "missing tool name/version";
    if (!j.contains("task") || !j["task"].is_string()) return "missing task";
    if (!j.contains("numerics") || !j["numerics"].is_object() || !j["numerics"].contains("seed"))
        return "missing numerics.seed";
    if (!j.contains("results") || !j["results"].is_object()) return "missing results";
    if (!j.contains("exit_code") || !j["exit_code"].is_number()) return "missing exit_code";
    return {};
}

} // namespace optstop
