#pragma once

#include "optstop/solver.hpp"

#include <string>
#include <vector>

namespace optstop {

enum class DpBoundary { ClampToReward, GeometricExtrapolation };

struct DpOptions {
    DpBoundary boundary = DpBoundary::GeometricExtrapolation;
    double extrapolationRate = 0.0; // decay used below the lower grid edge
    int maxIterations = 100000;
    double tol = 1e-10;      // relative sup-norm change at termination
    double stopRelTol = 1e-8;
    double stopAbsTol = 1e-12;
    bool expectInteriorThreshold = false; // stopping set touching the lower edge becomes an error
};

struct DpResult {
    std::vector<double> grid;   // lattice-aligned, ascending
    std::vector<double> values; // converged value per grid point
    std::vector<char> stopping; // value within tolerance of the reward
    int iterations = 0;
    double residual = 0.0;
    double step = 0.0;
    bool hitIterationCap = false;
};

/// Bellman iteration V <- max(g, e^{-q} E V(. + xi)) from V = g on a lattice
/// grid spanning [lo, hi]; states above hi are pinned to the reward (they
/// must lie inside the stopping region for the answer to be meaningful), and
/// states below lo follow the boundary rule. Zero-discount instances require
/// a negative-mean law, otherwise the iteration may not converge and the
/// oracle refuses.
DpResult valueIteration(const IncrementLaw& law, const RewardFunction& f, double q,
                        double lo, double hi, const DpOptions& opts = {});

struct OneSidedCheck {
    bool isUpSet = false;
    double threshold = std::numeric_limits<double>::quiet_NaN(); // min of the stopping set
};
OneSidedCheck checkOneSided(const DpResult& dp);

struct CrossValidation {
    bool pass = false;
    bool thresholdOk = false;
    bool valuesOk = false;
    double thresholdGap = 0.0;
    double worstValueGap = 0.0;
    double worstX = 0.0;
    std::string note;
};

/// Compares a solver solution against the DP oracle on the oracle's grid:
/// thresholds must agree within one grid step and values within
/// max(1e-6 relative-or-absolute, 4 standard errors + seAllowance).
CrossValidation crossValidate(const Solution& solution, const DpResult& dp, double gridStep,
                              double seAllowance = 0.0);

} // namespace optstop
