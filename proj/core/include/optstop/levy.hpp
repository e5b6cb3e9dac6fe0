#pragma once

#include "optstop/increment_law.hpp"
#include "optstop/solver.hpp"

#include <optional>
#include <vector>

namespace optstop {

struct LevyJumps {
    double rate = 0.0; // per unit time, > 0
    JumpLaw law = JumpLaw::constant(1.0);
};

/// Finite-activity jump diffusion: drift t + sigma B_t + compound Poisson.
/// P(X_1 > 0) > 0 is validated at construction; infinite-activity inputs are
/// unrepresentable by construction (the jump part is a compound Poisson).
class LevyModel {
public:
    LevyModel(double drift, double sigma, std::optional<LevyJumps> jumps = std::nullopt);

    double drift() const { return drift_; }
    double sigma() const { return sigma_; }
    const std::optional<LevyJumps>& jumps() const { return jumps_; }
    double meanPerUnitTime() const;

private:
    double drift_ = 0.0;
    double sigma_ = 0.0;
    std::optional<LevyJumps> jumps_;
};

/// Exact law of X_dt - X_0: Gaussian(drift dt, sigma^2 dt) plus a
/// Poisson(rate dt) compound of the jump law; the log-MGF composes to
/// dt * (drift l + sigma^2 l^2 / 2 + rate (E e^{lJ} - 1)).
IncrementLaw stepLaw(const LevyModel& model, double dt);

enum class Regularity { Regular, Irregular };

/// 0 is regular for (0, inf) iff the Gaussian part is active or the drift is
/// positive; finite-activity jumps alone never enter (0, inf) immediately.
Regularity regularityOfZero(const LevyModel& model);

struct ThresholdSequenceLevel {
    int level = 0; // step 2^-level
    Regime regime = Regime::Inconclusive;
    double u = 0.0;
    double tolerance = 0.0;
};

struct ThresholdSequence {
    std::vector<ThresholdSequenceLevel> levels;
    double extrapolated = 0.0; // +infinity when every level reports NeverStop
    bool infinite = false;
};

/// Thresholds of the dyadic walks, level by level; nondecreasing in the
/// level up to Monte Carlo tolerance (violations beyond 4 sigma abort with
/// MonotonicityViolated). The extrapolation fits a geometric gap decay on
/// the last levels and is advisory; the per-level values stand on their own.
ThresholdSequence thresholdSequence(const LevyModel& model, const RewardFunction& f, double q,
                                    int maxLevel, long perLevelBudget,
                                    const SolverOptions& base = {});

/// Value of the dyadic threshold rule at step 2^-level from x: stop at the
/// first grid time with the path at or above the threshold. Exact per-step
/// sampling; drift-only gaps are resolved event by event when sigma = 0.
Estimate valueAtLevel(const LevyModel& model, const RewardFunction& f, double q, int level,
                      double threshold, double x, const McOptions& opts = {});

/// Return kernel of the dyadic walk (first grid time at or above the start
/// again), simulated event by event for sigma = 0 models where grid stepping
/// would crawl through near-degenerate increments.
ReturnKernel dyadicReturnKernel(const LevyModel& model, double q, int level, const McOptions& opts);

} // namespace optstop
