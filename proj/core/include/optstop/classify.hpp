#pragma once

#include "optstop/increment_law.hpp"
#include "optstop/reward.hpp"

#include <optional>
#include <string>

namespace optstop {

enum class Finiteness { Finite, Infinite, Inconclusive };

struct FinitenessVerdict {
    Finiteness verdict = Finiteness::Inconclusive;
    std::string witness; // the numbers backing the verdict, reproducible from the inputs
    double betaUsed = 0.0;
    std::optional<double> thresholdUpperBound; // set when a constant reward tail pins u from above
};

/// Scans delta over {1, 1/2, ..., 2^-20} and returns the first delta with
/// E e^{(beta+delta) xi} <= e^q; a sufficient condition for a finite
/// threshold.
struct DeltaWitness {
    bool found = false;
    double delta = 0.0;
    double logMgfValue = 0.0;
};
DeltaWitness sufficientFinite(const IncrementLaw& law, const RewardFunction& f, double q);

enum class SufficiencyResult { Yes, No, NotApplicable };

struct InfiniteCheck {
    SufficiencyResult result = SufficiencyResult::NotApplicable;
    std::string note;
};

/// E e^{beta xi} >= e^q forces an infinite threshold, provided the log-reward
/// slope stays strictly above beta everywhere and max{q, beta} > 0. A slope
/// gap that is only confirmed on a probe grid is not accepted (NotApplicable
/// with a note), so a Yes is always sound.
InfiniteCheck sufficientInfinite(const IncrementLaw& law, const RewardFunction& f, double q);

/// Full decision chain: the exact light-tail characterization when its
/// provisos hold, then the one-sided sufficient tests, the constant-tail
/// bound, the power-reward moment condition, and the zero-discount
/// recurrent-walk analysis; Inconclusive when nothing applies.
FinitenessVerdict lightTailCharacterization(const IncrementLaw& law, const RewardFunction& f, double q);

enum class NsVerdict { Finite, NotApplicable };

/// Moment condition for power rewards (x^+)^nu: finite threshold when either
/// q > 0 with E[(X^+)^nu] < inf, or q = 0 with negative mean and
/// E[(X^+)^{nu+1}] < inf. Moments are certified through the MGF domain.
NsVerdict novikovShiryaevCondition(const IncrementLaw& law, double nu, double q);

/// Supermartingale certificate that the one-step ratio stays at or below 1
/// left of atX: the reward is positive on all of R and
/// e^{-q} mgf(h'(atX-)) <= 1. Sound but not complete.
bool stopEverywhereCertificate(const IncrementLaw& law, const RewardFunction& f, double q, double atX);

} // namespace optstop
