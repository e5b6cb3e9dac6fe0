#include "optstop/errors.hpp"
#include "optstop/problem.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct CommonArgs {
    std::string specPath;
    std::string outDir = "out";
    std::uint64_t seed = 0;
    bool seedSet = false;
    unsigned threads = 0;
    bool threadsSet = false;
    bool plot = false;
};

void attachCommon(CLI::App* sub, CommonArgs& args, bool specRequired) {
    auto* spec = sub->add_option("--spec", args.specPath, "problem description (JSON)");
    if (specRequired) spec->required();
    sub->add_option("--out", args.outDir, "output directory (default: out)");
    sub->add_option("--seed", args.seed, "root seed override")->each([&](const std::string&) {
        args.seedSet = true;
    });
    sub->add_option("--threads", args.threads, "worker threads (0 = hardware)")
        ->each([&](const std::string&) { args.threadsSet = true; });
    sub->add_flag("--plot", args.plot, "also emit tab-separated plot files");
}

std::string readFile(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw optstop::Error("cli", "cannot read '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-sided optimal stopping for random walks and jump diffusions"};
    app.require_subcommand(1);

    const std::pair<const char*, optstop::Task> commands[] = {
        {"solve", optstop::Task::Solve},
        {"oracle", optstop::Task::OracleCheck},
        {"levy", optstop::Task::LevySequence},
        {"smoothfit", optstop::Task::SmoothFit},
        {"classify", optstop::Task::Classify},
        {"bench", optstop::Task::Bench},
    };
    const char* descriptions[] = {
        "solve a one-step-law stopping problem",
        "solve and cross-check against the dynamic-programming oracle",
        "dyadic threshold sequence for a continuous-time model",
        "smooth-fit analysis at the optimal boundary",
        "finiteness classification of the threshold",
        "run the built-in benchmark suite",
    };

    CommonArgs args;
    CLI::App* subs[6];
    for (int i = 0; i < 6; ++i) {
        subs[i] = app.add_subcommand(commands[i].first, descriptions[i]);
        attachCommon(subs[i], args, commands[i].second != optstop::Task::Bench);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        optstop::Task task = optstop::Task::Bench;
        for (int i = 0; i < 6; ++i)
            if (subs[i]->parsed()) task = commands[i].second;

        optstop::ProblemSpec spec = [&] {
            if (!args.specPath.empty()) return optstop::parseProblemSpec(readFile(args.specPath));
            // bench needs no problem description
            optstop::ProblemSpec s(optstop::RewardFunction::indicator(0.0),
                                   optstop::IncrementLaw::lattice(1.0, {{1.0, 0.5}, {-1.0, 0.5}}));
            return s;
        }();
        spec.task = task;
        if (args.seedSet) spec.numerics.seed = args.seed;
        if (args.threadsSet) spec.numerics.threads = args.threads;
        if (const char* env = std::getenv("OPTSTOP_THREADS")) {
            const long n = std::strtol(env, nullptr, 10);
            if (n >= 1) spec.numerics.threads = static_cast<unsigned>(n);
        }

        optstop::RunOptions run;
        run.outDir = args.outDir;
        run.emitPlots = args.plot;
        const optstop::RunResult result = optstop::runProblem(spec, run);
        std::cout << result.summary << "\n";
        for (const auto& fname : result.filesWritten) std::cout << "  wrote " << args.outDir << "/" << fname << "\n";
        return result.exitCode;
    } catch (const optstop::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
