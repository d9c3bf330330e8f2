#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace poolsim::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

constexpr int kCriteria = 14;

CriterionResult run_criterion(int id);

// Runs every criterion, printing one pass/fail line each to out.
std::vector<CriterionResult> run_all(std::ostream& out);

} // namespace poolsim::acceptance
