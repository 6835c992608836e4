// Acceptance suite runner: one pass/fail line per criterion, exit 0 only
// when all pass.

#include "wachlab/acceptance.hpp"

#include <cstdio>

int main() {
    auto results = wachlab::acceptance::run_all();
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] criterion %d (%.1fs): %s\n", r.pass ? "PASS" : "FAIL", r.index, r.seconds,
                    r.detail.c_str());
        std::fflush(stdout);
        all = all && r.pass;
    }
    std::printf("%s\n", all ? "acceptance: ALL PASS" : "acceptance: FAILURES");
    return all ? 0 : 1;
}
