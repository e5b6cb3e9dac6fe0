#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace optstop {

struct AcceptanceResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AcceptanceOptions {
    std::uint64_t seed = 0x5EED5EEDull;
    unsigned threads = 0;
};

/// The built-in benchmark suite: nine checks with pinned tolerances covering
/// the exact-lattice benchmark values, the unbounded regimes, the Brownian
/// and Poisson-with-drift reference instances, and the randomized structural
/// property suites. Each entry prints one pass/fail line when `print` is set.
std::vector<AcceptanceResult> runAcceptanceSuite(const AcceptanceOptions& opts = {},
                                                 bool print = false);

} // namespace optstop
