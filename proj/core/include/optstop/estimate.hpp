#pragma once

#include <cmath>

namespace optstop {

/// A point estimate with its standard error. Exact computations carry se = 0.
struct Estimate {
    double value = 0.0;
    double se = 0.0;

    bool agreesWith(const Estimate& other, double nSigma, double absTol = 0.0) const {
        const double gap = std::abs(value - other.value);
        const double band = nSigma * (se + other.se) + absTol;
        return gap <= band;
    }
};

} // namespace optstop
