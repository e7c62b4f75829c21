#include "sanex/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace sanex {

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& st) {
    const std::size_t n = params.size();
    if (grads.size() != n || st.m.size() != n || st.v.size() != n)
        throw std::invalid_argument("adam_step: shape mismatch between params, grads and state");
    st.t += 1;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < n; ++i) {
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grads[i];
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grads[i] * grads[i];
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        params[i] -= st.alpha * mhat / (std::sqrt(vhat) + st.eps);
    }
}

}  // namespace sanex
