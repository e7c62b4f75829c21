#pragma once

#include <functional>
#include <vector>

namespace sanex {

// Central-difference gradient of a scalar function of a flat parameter
// vector. The function must be deterministic in the parameters (freeze all
// noise draws before calling). Throws if f evaluates to a non-finite value,
// naming the offending coordinate.
std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> params, double h = 1e-5);

// max over coordinates of |a-g| / max(|a|, |g|, floor); the comparison used
// throughout the gradient-check suites.
double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric,
                          double abs_floor = 1e-7);

}  // namespace sanex
