#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sanex/qnet.hpp"

namespace sanex {

struct GradSuiteReport {
    int nets = 0;
    double worst_rel_err = 0.0;
    bool pass = true;
    std::vector<std::string> failures;
};

// For n_nets random tiny networks of the given strategy: freeze the noise
// draws, compute the analytic batch-loss gradient over every parameter, and
// compare against central finite differences.
GradSuiteReport run_gradient_suite(Strategy strategy, int n_nets, std::uint64_t seed,
                                   double rel_tol = 1e-4, double abs_floor = 1e-7,
                                   double h = 1e-6, bool perturb_with_next_state = false);

}  // namespace sanex
