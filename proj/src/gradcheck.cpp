#include "sanex/gradcheck.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sanex {

std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> params, double h) {
    if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be positive");
    std::vector<double> grad(params.size(), 0.0);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double p0 = params[i];
        params[i] = p0 + h;
        const double fp = f(params);
        params[i] = p0 - h;
        const double fm = f(params);
        params[i] = p0;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("finite_diff_grad: non-finite f at coordinate " + std::to_string(i));
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric,
                          double abs_floor) {
    if (analytic.size() != numeric.size())
        throw std::invalid_argument("max_relative_error: size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric[i]), abs_floor});
        worst = std::max(worst, std::fabs(analytic[i] - numeric[i]) / denom);
    }
    return worst;
}

}  // namespace sanex
