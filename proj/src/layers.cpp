#include "sanex/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace sanex {

void LinearLayer::zero_grad() {
    gradW.fill(0.0);
    gradb.fill(0.0);
}

void glorot_uniform_init(Rng& rng, LinearLayer& layer) {
    const double bound = std::sqrt(6.0 / (layer.in_width() + layer.out_width()));
    for (double& w : layer.W.data) w = rng.uniform(-bound, bound);
    layer.b.fill(0.0);
}

void he_normal_init(Rng& rng, LinearLayer& layer) {
    const double sd = std::sqrt(2.0 / layer.in_width());
    for (double& w : layer.W.data) w = sd * rng.normal();
    layer.b.fill(0.0);
}

Mat mlp_forward(const std::vector<LinearLayer>& layers, const Mat& x, MlpCache* cache,
                bool relu_after_last) {
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
    }
    Mat cur = x;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const LinearLayer& layer = layers[k];
        if (cur.rows != layer.in_width() || cur.cols != 1)
            throw std::invalid_argument("mlp_forward: input width mismatch");
        if (cache) cache->inputs.push_back(cur);
        Mat z = add(matmul(layer.W, cur), layer.b);
        if (cache) cache->pre.push_back(z);
        const bool last = (k + 1 == layers.size());
        cur = (!last || relu_after_last) ? relu(z) : z;
    }
    return cur;
}

Mat mlp_backward(std::vector<LinearLayer>& layers, const MlpCache& cache, const Mat& dy,
                 bool relu_after_last) {
    if (cache.inputs.size() != layers.size())
        throw std::invalid_argument("mlp_backward: cache does not match layers");
    Mat d = dy;
    for (int k = static_cast<int>(layers.size()) - 1; k >= 0; --k) {
        LinearLayer& layer = layers[static_cast<std::size_t>(k)];
        const Mat& z = cache.pre[static_cast<std::size_t>(k)];
        const bool last = (k + 1 == static_cast<int>(layers.size()));
        Mat dz = d;
        if (!last || relu_after_last) {
            for (std::size_t i = 0; i < dz.data.size(); ++i)
                if (z.data[i] <= 0.0) dz.data[i] = 0.0;
        }
        const Mat& x = cache.inputs[static_cast<std::size_t>(k)];
        for (int i = 0; i < layer.W.rows; ++i)
            for (int j = 0; j < layer.W.cols; ++j) layer.gradW(i, j) += dz(i, 0) * x(j, 0);
        for (int i = 0; i < layer.b.rows; ++i) layer.gradb(i, 0) += dz(i, 0);
        d = matmul(transpose(layer.W), dz);
    }
    return d;
}

}  // namespace sanex
