#include "optstop/classify.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace optstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string numbers(double a, const char* an, double b, const char* bn) {
    std::ostringstream os;
    os.precision(12);
    os << an << "=" << a << ", " << bn << "=" << b;
    return os.str();
}

// The reward keeps rising at every point of its tail, so it never attains
// its supremum. Certain for the analytic kinds and for custom rewards whose
// strict slope gap was certified by the constructor's caller.
bool certifiedNeverAttainsSup(const RewardFunction& f) {
    if (f.constantTailEdge()) return false;
    switch (f.kind()) {
    case RewardKind::PowerPlus:
    case RewardKind::ExpCall:
    case RewardKind::ExpPut:
    case RewardKind::ExpLinear:
        return true;
    case RewardKind::PiecewiseLogLinear:
        return f.asymptoticSlope() > 0.0;
    case RewardKind::Indicator:
        return false;
    case RewardKind::Custom:
        return f.tailSlopeGap() == TailSlopeGap::Strict;
    }
    return false;
}

} // namespace

DeltaWitness sufficientFinite(const IncrementLaw& law, const RewardFunction& f, double q) {
    const double beta = f.asymptoticSlope();
    DeltaWitness w;
    double delta = 1.0;
    for (int i = 0; i <= 20; ++i, delta *= 0.5) {
        const double lm = law.logMgf(beta + delta);
        if (lm <= q) {
            w.found = true;
            w.delta = delta;
            w.logMgfValue = lm;
            return w;
        }
    }
    return w;
}

InfiniteCheck sufficientInfinite(const IncrementLaw& law, const RewardFunction& f, double q) {
    const double beta = f.asymptoticSlope();
    if (!(law.mgfDomainMax() > 0.0))
        return {SufficiencyResult::NotApplicable,
                "no MGF declared: E e^{beta X} cannot be compared"};
    if (!(std::max(q, beta) > 0.0))
        return {SufficiencyResult::NotApplicable, "max{q, beta} = 0"};
    switch (f.tailSlopeGap()) {
    case TailSlopeGap::Attained:
        return {SufficiencyResult::NotApplicable, "log-reward slope reaches beta"};
    case TailSlopeGap::GridOnly:
        return {SufficiencyResult::NotApplicable,
                "slope gap cannot be certified beyond a probe grid"};
    case TailSlopeGap::Strict:
        break;
    }
    const double lm = law.logMgf(beta);
    if (lm >= q)
        return {SufficiencyResult::Yes, numbers(lm, "log mgf(beta)", q, "q")};
    return {SufficiencyResult::No, numbers(lm, "log mgf(beta)", q, "q")};
}

FinitenessVerdict lightTailCharacterization(const IncrementLaw& law, const RewardFunction& f, double q) {
    const double beta = f.asymptoticSlope();
    FinitenessVerdict v;
    v.betaUsed = beta;

    // exact characterization: strict slope gap, max{q,beta} > 0, and an MGF
    // finite beyond beta make "mgf(beta) < e^q" equivalent to a finite u
    if (f.tailSlopeGap() == TailSlopeGap::Strict && std::max(q, beta) > 0.0 &&
        law.mgfDomainMax() > beta) {
        const double lm = law.logMgf(beta);
        if (std::isfinite(lm)) {
            v.verdict = lm < q ? Finiteness::Finite : Finiteness::Infinite;
            v.witness = "light-tail characterization: " + numbers(lm, "log mgf(beta)", q, "q");
            return v;
        }
    }

    // a constant reward tail bounds the threshold by its left edge
    if (const auto edge = f.constantTailEdge()) {
        v.verdict = Finiteness::Finite;
        v.thresholdUpperBound = *edge;
        std::ostringstream os;
        os.precision(12);
        os << "reward constant from x = " << *edge << " on, so u <= " << *edge;
        v.witness = os.str();
        return v;
    }

    if (const DeltaWitness w = sufficientFinite(law, f, q); w.found) {
        v.verdict = Finiteness::Finite;
        std::ostringstream os;
        os.precision(12);
        os << "delta witness: delta=" << w.delta << ", log mgf(beta+delta)=" << w.logMgfValue
           << " <= q=" << q;
        v.witness = os.str();
        return v;
    }

    if (const InfiniteCheck c = sufficientInfinite(law, f, q); c.result == SufficiencyResult::Yes) {
        v.verdict = Finiteness::Infinite;
        v.witness = "submartingale condition: " + c.note;
        return v;
    }

    if (f.kind() == RewardKind::PowerPlus &&
        novikovShiryaevCondition(law, f.paramA(), q) == NsVerdict::Finite) {
        v.verdict = Finiteness::Finite;
        v.witness = q > 0.0 ? "power-reward moment condition with q > 0"
                            : "power-reward moment condition: negative mean and finite moments";
        return v;
    }

    // zero discount with a walk that keeps returning upward: deferring one
    // more ascent always beats a reward that never attains its supremum
    if (q == 0.0 && law.mean() >= 0.0 && certifiedNeverAttainsSup(f)) {
        v.verdict = Finiteness::Infinite;
        v.witness = "zero discount, nonnegative mean increment, reward below its supremum everywhere";
        return v;
    }

    v.verdict = Finiteness::Inconclusive;
    if (law.mgfDomainMax() <= beta)
        v.witness = "no MGF beyond beta: the light-tail characterization does not apply";
    else
        v.witness = "no applicable test";
    return v;
}

NsVerdict novikovShiryaevCondition(const IncrementLaw& law, double nu, double q) {
    (void)nu; // any polynomial moment is finite once the MGF domain is nonempty
    if (!(law.mgfDomainMax() > 0.0)) return NsVerdict::NotApplicable;
    if (q > 0.0) return NsVerdict::Finite;
    if (law.mean() < 0.0) return NsVerdict::Finite;
    return NsVerdict::NotApplicable;
}

bool stopEverywhereCertificate(const IncrementLaw& law, const RewardFunction& f, double q, double atX) {
    if (f.leftEdge() != -kInf) return false; // stopping everywhere needs g > 0 on all of R
    const double slope = f.logDerivLeft(atX);
    if (!std::isfinite(slope)) return false;
    const double lm = law.logMgf(slope);
    return lm <= q;
}

} // namespace optstop
