#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mheslam::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Runs every acceptance criterion, printing one pass/fail line per criterion
/// to `out`. Returns the per-criterion results.
std::vector<CriterionResult> run_all(std::ostream& out);

/// Convenience wrapper: true iff every criterion passed.
bool run_and_report(std::ostream& out);

}  // namespace mheslam::acceptance
