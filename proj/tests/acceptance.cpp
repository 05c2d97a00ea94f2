// Acceptance runner: executes the named statistical verification criteria
// (all of them when none are named) and reports one pass/fail line each.
// Exit codes: 0 all passed, 1 at least one failed, 2 runner error.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "pnp/verify.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> names;
    for (int i = 1; i < argc; ++i) names.emplace_back(argv[i]);
    try {
        const int failures = pnp::run_verification(names, std::cout);
        return failures == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
