#pragma once

#include <cstddef>
#include <functional>

namespace optstop {

/// Worker count: OPTSTOP_THREADS environment variable when set, otherwise
/// the hardware concurrency.
unsigned defaultThreadCount();

/// Runs fn(i) for i in [0, n). Callers write results into per-index slots,
/// so the outcome is independent of how work is scheduled. threads == 0
/// means defaultThreadCount(); threads == 1 runs inline.
void parallelFor(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace optstop
