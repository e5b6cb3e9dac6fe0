// Acceptance suite runner: one pass/fail line per criterion, nonzero exit on
// any failure. The same suite backs the CLI's bench command.
#include "optstop/acceptance.hpp"

#include <cstdio>

int main() {
    const auto results = optstop::runAcceptanceSuite({}, /*print=*/true);
    int failures = 0;
    for (const auto& r : results)
        if (!r.pass) ++failures;
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all %zu criteria pass\n", results.size());
    return 0;
}
