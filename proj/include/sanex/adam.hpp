#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sanex {

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t t = 0;
    double alpha = 6.25e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1.5e-4;

    AdamState() = default;
    AdamState(std::size_t n, double alpha_, double eps_)
        : m(n, 0.0), v(n, 0.0), alpha(alpha_), eps(eps_) {}
};

// Standard bias-corrected Adam update, elementwise in place.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& st);

}  // namespace sanex
