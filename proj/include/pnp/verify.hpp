#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pnp {

// Outcome of one verification criterion. `detail` lists every sub-check with
// its measured value and tolerance; failing sub-checks are prefixed FAILED.
struct CriterionResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct Criterion {
    const char* name;
    const char* what; // one line: the property being checked
    CriterionResult (*run)();
};

std::span<const Criterion> verification_criteria();
const Criterion* find_criterion(const std::string& name);

// Runs the named criteria (all when empty), one [PASS]/[FAIL] line each plus
// a tally; returns the number of failures.
int run_verification(const std::vector<std::string>& names, std::ostream& out);

} // namespace pnp
