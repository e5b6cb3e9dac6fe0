#pragma once

#include "optstop/classify.hpp"
#include "optstop/first_passage.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace optstop {

struct RatioPoint {
    double x;
    double rho;
    double se;
};

enum class Regime { StopEverywhere, Finite, NeverStop, Inconclusive };
enum class SolveMethod { ExactLattice, MonteCarlo };

struct SolverOptions {
    std::optional<std::pair<double, double>> bracket; // default: [x0+eps, x0+100] or [-100, 100]
    double tol = 1e-9;                                // bisection width target
    double confidence = 0.99;                         // Monte Carlo comparison confidence
    int maxBudgetDoublings = 6;
    std::vector<double> levelSchedule;                // never-stop probe levels; empty = auto
    double levelTolerance = 1e-6;                     // never-stop convergence tolerance
    bool forceMonteCarlo = false;
    bool computeNeverStopValue = true; // fill w via level iterates on NeverStop
    McOptions mc{};
    /// Replacement sampler for the return kernel (takes the Monte Carlo
    /// options, returns the kernel); used where the one-step law admits a
    /// faster path simulation than stepping draw by draw.
    std::function<ReturnKernel(const McOptions&)> kernelFactory;
};

struct NeverStopResult {
    double w = 0.0; // +infinity when the level iterates diverge
    bool diverged = false;
    double beta = 0.0;
    std::vector<double> iterates;
    std::vector<double> iterateErrors;
};

struct ThresholdSolution {
    Regime regime = Regime::Inconclusive;
    double u = std::numeric_limits<double>::quiet_NaN();
    double uTolerance = 0.0;
    double w = std::numeric_limits<double>::quiet_NaN();
    bool wDiverged = false;
    double beta = 0.0;
    std::vector<double> levelIterates;
    std::string inconclusiveReason;
    std::vector<RatioPoint> ratioTrace;
    SolveMethod method = SolveMethod::ExactLattice;
    FinitenessVerdict classification;
};

struct Solution;

/// Value of the solved stopping rule; dispatches on the regime.
/// Finite: the threshold-rule value, clamped to >= g (a guarantee the exact
/// value satisfies anyway). NeverStop: e^{beta x} W. StopEverywhere: g.
class ValueFunction {
public:
    struct Impl; // defined with the solver; holds the regime snapshot

    double operator()(double x) const { return estimate(x).value; }
    Estimate estimate(double x) const;

    /// Batched evaluation; one factorized solve on lattices.
    std::vector<Estimate> profile(std::span<const double> xs) const;

private:
    friend Solution solve(const IncrementLaw&, const RewardFunction&, double, const SolverOptions&);
    std::shared_ptr<const Impl> impl_;
};

struct Solution {
    ThresholdSolution threshold;
    ValueFunction value;
    /// Left limit of the value at the threshold, estimated when the threshold
    /// sits on a positivity edge where the value may jump.
    std::optional<double> leftValueAtThreshold;
};

/// rho(x) = E_x[e^{-qT} g(X_T)] / g(x) for T the first return to level x;
/// +infinity where g(x) = 0.
Estimate oneStepRatio(const IncrementLaw& law, const RewardFunction& f, double q, double x,
                      const SolverOptions& opts = {});

/// Locates u = inf{ x : rho(x) <= 1 } by monotone bisection with geometric
/// bracket expansion; classifier certificates decide the unbounded regimes.
ThresholdSolution findThreshold(const IncrementLaw& law, const RewardFunction& f, double q,
                                const SolverOptions& opts = {});

/// Value of the rule "stop on first entry to [threshold, inf)" from x.
Estimate valueWithThreshold(const IncrementLaw& law, const RewardFunction& f, double q,
                            double threshold, double x, const SolverOptions& opts = {});

/// Batched valueWithThreshold over commensurate starts (one factorized solve
/// on lattices).
std::vector<Estimate> valueProfileWithThreshold(const IncrementLaw& law, const RewardFunction& f,
                                                double q, double threshold,
                                                std::span<const double> xs,
                                                const SolverOptions& opts = {});

/// Monotone level iterates Q_y(0) along the schedule; diverging iterates
/// report w = +infinity. Requires a regime previously classified as not
/// Finite. Throws ScheduleTooShort when the schedule ends undecided.
NeverStopResult neverStopValue(const IncrementLaw& law, const RewardFunction& f, double q,
                               std::span<const double> levels, const SolverOptions& opts = {});

/// classify -> findThreshold -> value accessor.
Solution solve(const IncrementLaw& law, const RewardFunction& f, double q,
               const SolverOptions& opts = {});

} // namespace optstop
