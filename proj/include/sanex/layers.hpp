#pragma once

#include <vector>

#include "sanex/mat.hpp"
#include "sanex/rng.hpp"

namespace sanex {

struct LinearLayer {
    Mat W;      // out x in
    Mat b;      // out x 1
    Mat gradW;  // same shape as W
    Mat gradb;  // same shape as b

    LinearLayer() = default;
    LinearLayer(int out, int in) : W(out, in), b(out, 1), gradW(out, in), gradb(out, 1) {}

    int in_width() const { return W.cols; }
    int out_width() const { return W.rows; }
    void zero_grad();
};

// W ~ U[-sqrt(6/(in+out)), +sqrt(6/(in+out))], b = 0.
void glorot_uniform_init(Rng& rng, LinearLayer& layer);
// W ~ N(0, 2/in), b = 0. Used for the perturbation-module layers.
void he_normal_init(Rng& rng, LinearLayer& layer);

// Pre-activations and layer inputs retained for the backward pass.
struct MlpCache {
    std::vector<Mat> inputs;  // inputs[k] = input to layer k
    std::vector<Mat> pre;     // pre[k] = W x + b of layer k
};

// y = L_n(relu(... relu(L_1(x)) ...)); relu after the final layer only when
// relu_after_last is set (the encoder convention).
Mat mlp_forward(const std::vector<LinearLayer>& layers, const Mat& x, MlpCache* cache,
                bool relu_after_last = false);

// Accumulates gradW/gradb on every layer and returns dloss/dx. dy is the
// gradient with respect to the forward output (post-relu when
// relu_after_last was set).
Mat mlp_backward(std::vector<LinearLayer>& layers, const MlpCache& cache, const Mat& dy,
                 bool relu_after_last = false);

}  // namespace sanex
