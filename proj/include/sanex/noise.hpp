#pragma once

#include <optional>
#include <vector>

#include "sanex/layers.hpp"
#include "sanex/mat.hpp"
#include "sanex/rng.hpp"

namespace sanex {

// z(x) = sgn(x) * sqrt(|x|).
double z_transform(double x);

// Rank-1 factored Gaussian noise for one linear layer:
//   eps_w[i][j] = z(raw_m[i]) * z(raw_l[j]),  eps_b[i] = z(raw_m[i]).
struct FactoredNoise {
    Mat eps_w;                  // m x l
    Mat eps_b;                  // m x 1
    std::vector<double> raw_l;  // length l
    std::vector<double> raw_m;  // length m
};

FactoredNoise sample_factored(Rng& rng, int l, int m);
// Builds the noise from given raw vectors; used by tests to freeze draws.
FactoredNoise factored_from_raw(std::vector<double> raw_l, std::vector<double> raw_m);

// NoisyNet layer: every weight and bias carries a learned per-parameter
// standard deviation next to its mean.
struct NoisyLinearParams {
    Mat mu_W, mu_b;
    Mat sigma_W, sigma_b;
    Mat grad_mu_W, grad_mu_b;
    Mat grad_sigma_W, grad_sigma_b;

    NoisyLinearParams() = default;
    NoisyLinearParams(int out, int in)
        : mu_W(out, in), mu_b(out, 1), sigma_W(out, in), sigma_b(out, 1),
          grad_mu_W(out, in), grad_mu_b(out, 1), grad_sigma_W(out, in), grad_sigma_b(out, 1) {}
    void zero_grad();
};

// y = (mu_W + sigma_W .* eps_w) x + (mu_b + sigma_b .* eps_b)
Mat noisy_linear_forward(const NoisyLinearParams& p, const FactoredNoise& n, const Mat& x);
// Accumulates grads on p and returns dloss/dx.
Mat noisy_linear_backward(NoisyLinearParams& p, const FactoredNoise& n, const Mat& x, const Mat& dy);

// The SANE perturbation module g_Theta: one hidden relu layer, one scalar
// output. The raw linear output is used directly as the noise scale; the
// induced perturbation distribution depends only on |sigma|, so no
// positivity transform is applied. Diagnostics report |sigma|.
struct SaneModule {
    LinearLayer hidden;
    LinearLayer out;
    int input_width = 0;

    SaneModule() = default;
    SaneModule(int input, int hidden_width)
        : hidden(hidden_width, input), out(1, hidden_width), input_width(input) {}
    bool empty() const { return input_width == 0; }
    void zero_grad();
};

struct SaneCache {
    Mat input;       // concat(h, extra)
    Mat hidden_pre;  // before relu
};

// sigma = out(relu(hidden(concat(h, extra)))). extra may be null.
double sane_sigma(const SaneModule& mod, const Mat& h, const Mat* extra, SaneCache* cache = nullptr);
// Accumulates grads on mod, returns dloss/d(input) given dloss/dsigma.
Mat sane_sigma_backward(SaneModule& mod, const SaneCache& cache, double dsigma);

// y = (W + sigma * eps_w) x + (b + sigma * eps_b)
Mat sane_perturbed_forward(const LinearLayer& layer, double sigma, const FactoredNoise& n, const Mat& x);
// Accumulates gradW/gradb on layer, adds the scalar noise-scale gradient to
// *dsigma, and returns dloss/dx.
Mat sane_perturbed_backward(LinearLayer& layer, double sigma, const FactoredNoise& n, const Mat& x,
                            const Mat& dy, double* dsigma);

}  // namespace sanex
