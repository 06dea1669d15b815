#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlbvp::acceptance {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

// Runs the full acceptance suite, printing one pass/fail line per
// criterion to `log`. Returns all results.
std::vector<CriterionResult> run_all(std::ostream& log);

// True when every criterion passed.
bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace nlbvp::acceptance
