#include "sanex/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace sanex {

double z_transform(double x) {
    return x >= 0.0 ? std::sqrt(x) : -std::sqrt(-x);
}

FactoredNoise factored_from_raw(std::vector<double> raw_l, std::vector<double> raw_m) {
    const int l = static_cast<int>(raw_l.size());
    const int m = static_cast<int>(raw_m.size());
    if (l < 1 || m < 1) throw std::invalid_argument("factored noise: l, m must be >= 1");
    FactoredNoise n;
    n.raw_l = std::move(raw_l);
    n.raw_m = std::move(raw_m);
    n.eps_w = Mat(m, l);
    n.eps_b = Mat(m, 1);
    std::vector<double> zl(static_cast<std::size_t>(l));
    for (int j = 0; j < l; ++j) zl[static_cast<std::size_t>(j)] = z_transform(n.raw_l[static_cast<std::size_t>(j)]);
    for (int i = 0; i < m; ++i) {
        const double zm = z_transform(n.raw_m[static_cast<std::size_t>(i)]);
        n.eps_b(i, 0) = zm;
        for (int j = 0; j < l; ++j) n.eps_w(i, j) = zm * zl[static_cast<std::size_t>(j)];
    }
    return n;
}

FactoredNoise sample_factored(Rng& rng, int l, int m) {
    return factored_from_raw(standard_normal(rng, l), standard_normal(rng, m));
}

void NoisyLinearParams::zero_grad() {
    grad_mu_W.fill(0.0);
    grad_mu_b.fill(0.0);
    grad_sigma_W.fill(0.0);
    grad_sigma_b.fill(0.0);
}

Mat noisy_linear_forward(const NoisyLinearParams& p, const FactoredNoise& n, const Mat& x) {
    if (!p.mu_W.same_shape(n.eps_w) || !p.mu_b.same_shape(n.eps_b) || x.rows != p.mu_W.cols || x.cols != 1)
        throw std::invalid_argument("noisy_linear_forward: shape mismatch");
    Mat y(p.mu_W.rows, 1);
    for (int i = 0; i < p.mu_W.rows; ++i) {
        // bias added after the product sum, mirroring the plain linear layer
        // so that zero sigmas reproduce it bitwise
        double acc = 0.0;
        for (int j = 0; j < p.mu_W.cols; ++j)
            acc += (p.mu_W(i, j) + p.sigma_W(i, j) * n.eps_w(i, j)) * x(j, 0);
        y(i, 0) = acc + (p.mu_b(i, 0) + p.sigma_b(i, 0) * n.eps_b(i, 0));
    }
    return y;
}

Mat noisy_linear_backward(NoisyLinearParams& p, const FactoredNoise& n, const Mat& x, const Mat& dy) {
    if (dy.rows != p.mu_W.rows || dy.cols != 1)
        throw std::invalid_argument("noisy_linear_backward: shape mismatch");
    Mat dx(x.rows, 1);
    for (int i = 0; i < p.mu_W.rows; ++i) {
        const double g = dy(i, 0);
        p.grad_mu_b(i, 0) += g;
        p.grad_sigma_b(i, 0) += g * n.eps_b(i, 0);
        for (int j = 0; j < p.mu_W.cols; ++j) {
            const double gw = g * x(j, 0);
            p.grad_mu_W(i, j) += gw;
            p.grad_sigma_W(i, j) += gw * n.eps_w(i, j);
            dx(j, 0) += (p.mu_W(i, j) + p.sigma_W(i, j) * n.eps_w(i, j)) * g;
        }
    }
    return dx;
}

void SaneModule::zero_grad() {
    hidden.zero_grad();
    out.zero_grad();
}

double sane_sigma(const SaneModule& mod, const Mat& h, const Mat* extra, SaneCache* cache) {
    Mat input = extra ? concat_rows(h, *extra) : h;
    if (input.rows != mod.input_width || input.cols != 1)
        throw std::invalid_argument("sane_sigma: input width mismatch");
    Mat pre = add(matmul(mod.hidden.W, input), mod.hidden.b);
    Mat act = relu(pre);
    Mat outv = add(matmul(mod.out.W, act), mod.out.b);
    if (cache) {
        cache->input = std::move(input);
        cache->hidden_pre = std::move(pre);
    }
    return outv(0, 0);
}

Mat sane_sigma_backward(SaneModule& mod, const SaneCache& cache, double dsigma) {
    Mat act = relu(cache.hidden_pre);
    for (int j = 0; j < mod.out.W.cols; ++j) mod.out.gradW(0, j) += dsigma * act(j, 0);
    mod.out.gradb(0, 0) += dsigma;
    Mat dact = scale(transpose(mod.out.W), dsigma);
    for (std::size_t i = 0; i < dact.data.size(); ++i)
        if (cache.hidden_pre.data[i] <= 0.0) dact.data[i] = 0.0;
    for (int i = 0; i < mod.hidden.W.rows; ++i) {
        mod.hidden.gradb(i, 0) += dact(i, 0);
        for (int j = 0; j < mod.hidden.W.cols; ++j)
            mod.hidden.gradW(i, j) += dact(i, 0) * cache.input(j, 0);
    }
    return matmul(transpose(mod.hidden.W), dact);
}

Mat sane_perturbed_forward(const LinearLayer& layer, double sigma, const FactoredNoise& n, const Mat& x) {
    if (!layer.W.same_shape(n.eps_w) || !layer.b.same_shape(n.eps_b) || x.rows != layer.W.cols || x.cols != 1)
        throw std::invalid_argument("sane_perturbed_forward: shape mismatch");
    Mat y(layer.W.rows, 1);
    for (int i = 0; i < layer.W.rows; ++i) {
        // bias added after the product sum, mirroring the plain linear layer
        // so that sigma = 0 reproduces it bitwise
        double acc = 0.0;
        for (int j = 0; j < layer.W.cols; ++j)
            acc += (layer.W(i, j) + sigma * n.eps_w(i, j)) * x(j, 0);
        y(i, 0) = acc + (layer.b(i, 0) + sigma * n.eps_b(i, 0));
    }
    return y;
}

Mat sane_perturbed_backward(LinearLayer& layer, double sigma, const FactoredNoise& n, const Mat& x,
                            const Mat& dy, double* dsigma) {
    if (dy.rows != layer.W.rows || dy.cols != 1)
        throw std::invalid_argument("sane_perturbed_backward: shape mismatch");
    Mat dx(x.rows, 1);
    double ds = 0.0;
    for (int i = 0; i < layer.W.rows; ++i) {
        const double g = dy(i, 0);
        layer.gradb(i, 0) += g;
        ds += g * n.eps_b(i, 0);
        for (int j = 0; j < layer.W.cols; ++j) {
            layer.gradW(i, j) += g * x(j, 0);
            ds += g * n.eps_w(i, j) * x(j, 0);
            dx(j, 0) += (layer.W(i, j) + sigma * n.eps_w(i, j)) * g;
        }
    }
    if (dsigma) *dsigma += ds;
    return dx;
}

}  // namespace sanex
