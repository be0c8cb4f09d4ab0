#pragma once

#include <string>
#include <utility>
#include <vector>

#include "designrisk/design.hpp"

namespace designrisk {

struct CheckResult {
    std::string name;
    bool passed = false;
    double rel_error = 0.0;
    std::string detail;
};

// SRS(N=4, n=2) plus three hand-built designs with unequal p(s), N <= 8.
std::vector<std::pair<std::string, ExactDesign>> oracle_designs();

// Compares the analytic design MSE, estimator unbiasedness and the
// anticipated / misspecified MSE against brute-force sums over every sample.
std::vector<CheckResult> run_enumeration_oracles(double tolerance = 1e-10);

}  // namespace designrisk
