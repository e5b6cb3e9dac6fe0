#pragma once

#include "optstop/estimate.hpp"
#include "optstop/increment_law.hpp"
#include "optstop/reward.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace optstop {

/// First passage at or above a level, counted from step 1 (StrictReturn,
/// meaningful when the start already sits at or above the level) or from
/// step 0 (Entry).
enum class PassageKind { StrictReturn, Entry };

struct McOptions {
    std::uint64_t seed = 0x5EED5EEDull;
    long budget = 100000;
    long maxSteps = 10000000;        // per-path cap; the q = 0 safety net
    double abandonThreshold = 1e-14; // abandon a path when its value bound drops below this
    bool allowZeroDiscountNonNegativeDrift = false; // caller override, see firstPassageMC
    unsigned threads = 0;            // 0 = defaultThreadCount()
    long batchSize = 4096;
};

struct PassageEstimate {
    double value = 0.0;
    double se = 0.0;
    double truncationBound = 0.0; // accumulated bound on abandoned-path mass
    long budget = 0;
};

/// One simulated first passage: the step count, the landing position (valid
/// only when the passage happened), and the discount weight e^{-q time}.
struct FirstPassageSample {
    bool finite = false;
    long time = 0;
    double position = 0.0;
    double discountWeight = 0.0;
};

/// Draws a single first-passage sample; paths are abandoned (reported as not
/// finite) under the same bounds the estimators use.
FirstPassageSample sampleFirstPassage(const IncrementLaw& law, double q, double level,
                                      double start, PassageKind kind, Rng& rng,
                                      const McOptions& opts = {});

/// Expected discounted reward at first passage, solved exactly on the
/// lattice by an absorbing-chain linear system (floor truncation error is
/// driven below 1e-13 of the absorbing reward scale).
///
/// Throws UnboundedExpectation when no geometric truncation bound exists
/// (q = 0 with nonnegative drift, unless the walk is skip-free up, where the
/// passage point is deterministic and the value is closed-form).
double firstPassageExact(const IncrementLaw& law, const RewardFunction& f, double q,
                         double level, double start, PassageKind kind);

/// Entry values from several starts in one factorized solve. Starts must be
/// commensurate (pairwise differences multiples of the lattice step); starts
/// at or above the level evaluate to g(start).
std::vector<double> firstPassageExactBatch(const IncrementLaw& law, const RewardFunction& f,
                                           double q, double level, std::span<const double> starts);

/// Monte Carlo counterpart; unbiased up to the recorded truncation bound and
/// deterministic given the seed. Throws TruncationDominates when abandoned
/// paths could account for more than 10% of the estimate.
PassageEstimate firstPassageMC(const IncrementLaw& law, const RewardFunction& f, double q,
                               double level, double start, PassageKind kind, const McOptions& opts);

/// Discounted overshoot kernel of the first return to the starting level:
/// samples of (e^{-qT}, X_T - level) for T the first step at or above the
/// level again. Translation invariance makes one kernel serve every level,
/// which is what lets a whole threshold search share a single solve (exact)
/// or a single set of paths (Monte Carlo, common random numbers).
struct ReturnKernel {
    bool exact = false;
    std::vector<double> weight;    // exact: absorbed discounted mass; MC: e^{-qT} per path (0 = never)
    std::vector<double> overshoot; // aligned with weight
    double truncationBound = 0.0;
    long budget = 0; // MC sample count (weights of abandoned paths are zero entries)
};

ReturnKernel exactReturnKernel(const IncrementLaw& law, double q);
ReturnKernel mcReturnKernel(const IncrementLaw& law, double q, const McOptions& opts);

/// rho(x) = E[e^{-qT} g(x + overshoot)] / g(x) evaluated from a kernel;
/// infinity where g(x) = 0.
Estimate ratioFromKernel(const ReturnKernel& kernel, const RewardFunction& f, double x);

/// Numerator of the ratio: E[e^{-qT} g(x + overshoot)].
Estimate passageValueFromKernel(const ReturnKernel& kernel, const RewardFunction& f, double x);

/// Expected all-time maximum of the zero-started walk. +infinity when the
/// mean is nonnegative. Exact for lattice laws (geometric ladder heights in
/// the skip-free case, an absorbing solve otherwise); a ladder-epoch
/// fixed-point Monte Carlo estimate for sampler laws.
Estimate expectedMaximum(const IncrementLaw& law, const McOptions& opts = {});

} // namespace optstop
