#include <doctest.h>

#include <cmath>

#include "sanex/gradcheck.hpp"
#include "sanex/layers.hpp"

using namespace sanex;

TEST_CASE("glorot init bound and variance") {
    Rng rng(3);
    const int in = 50, out = 50;
    const double bound = std::sqrt(6.0 / (in + out));
    double sumsq = 0;
    int count = 0;
    for (int rep = 0; rep < 40; ++rep) {
        LinearLayer layer(out, in);
        glorot_uniform_init(rng, layer);
        for (double w : layer.W.data) {
            REQUIRE(std::abs(w) <= bound);
            sumsq += w * w;
            ++count;
        }
        for (double b : layer.b.data) REQUIRE(b == 0.0);
    }
    // Var U[-a,a] = a^2/3 = 2/(in+out)
    CHECK(std::abs(sumsq / count - 2.0 / (in + out)) < 0.05 * 2.0 / (in + out));
}

TEST_CASE("he init variance") {
    Rng rng(4);
    const int in = 60, out = 40;
    double sumsq = 0;
    int count = 0;
    for (int rep = 0; rep < 40; ++rep) {
        LinearLayer layer(out, in);
        he_normal_init(rng, layer);
        for (double w : layer.W.data) {
            sumsq += w * w;
            ++count;
        }
        for (double b : layer.b.data) REQUIRE(b == 0.0);
    }
    CHECK(std::abs(sumsq / count - 2.0 / in) < 0.05 * 2.0 / in);
}

TEST_CASE("mlp forward hand cases") {
    // single layer, no relu after last: y = 2*3 + 1 = 7
    std::vector<LinearLayer> net(1, LinearLayer(1, 1));
    net[0].W(0, 0) = 2.0;
    net[0].b(0, 0) = 1.0;
    Mat y = mlp_forward(net, Mat::column({3.0}), nullptr);
    CHECK(y.data[0] == 7.0);
    // relu after last clips negatives
    net[0].W(0, 0) = -2.0;
    net[0].b(0, 0) = 1.0;
    CHECK(mlp_forward(net, Mat::column({3.0}), nullptr, true).data[0] == 0.0);

    // two layers with an interior relu:
    // h = relu([1,-1;2,0] x + [0,1]) with x=(1,2) -> relu(-1, 3) = (0,3)
    // y = [1,1] h + [-1] = 2
    std::vector<LinearLayer> deep;
    deep.emplace_back(2, 2);
    deep[0].W = Mat(2, 2, {1, -1, 2, 0});
    deep[0].b = Mat::column({0, 1});
    deep.emplace_back(1, 2);
    deep[1].W = Mat(1, 2, {1, 1});
    deep[1].b = Mat::column({-1});
    CHECK(mlp_forward(deep, Mat::column({1, 2}), nullptr).data[0] == 2.0);
}

TEST_CASE("mlp backward matches finite differences on random nets") {
    Rng meta(99);
    for (int rep = 0; rep < 100; ++rep) {
        const int in = 1 + meta.uniform_int(4);
        const int hidden = 1 + meta.uniform_int(4);
        const int out = 1 + meta.uniform_int(3);
        const bool relu_last = meta.uniform_int(2) == 1;
        const int depth = 1 + meta.uniform_int(2);

        std::vector<LinearLayer> net;
        if (depth == 2) net.emplace_back(hidden, in);
        net.emplace_back(out, depth == 2 ? hidden : in);
        std::vector<double> flat;
        for (auto& layer : net) {
            glorot_uniform_init(meta, layer);
            // jitter biases off the relu kink at exactly zero
            for (double& b : layer.b.data) b = meta.uniform(-0.1, 0.1);
        }
        for (auto& layer : net) {
            flat.insert(flat.end(), layer.W.data.begin(), layer.W.data.end());
            flat.insert(flat.end(), layer.b.data.begin(), layer.b.data.end());
        }
        Mat x(in, 1);
        for (double& v : x.data) v = meta.uniform(-1.0, 1.0);
        Mat dy(out, 1);
        for (double& v : dy.data) v = meta.uniform(-1.0, 1.0);

        auto unflatten = [&](const std::vector<double>& f) {
            std::size_t k = 0;
            std::vector<LinearLayer> copy = net;
            for (auto& layer : copy) {
                for (double& w : layer.W.data) w = f[k++];
                for (double& b : layer.b.data) b = f[k++];
            }
            return copy;
        };
        auto loss = [&](const std::vector<double>& f) {
            std::vector<LinearLayer> copy = unflatten(f);
            Mat y = mlp_forward(copy, x, nullptr, relu_last);
            return dot(dy, y);
        };

        MlpCache cache;
        mlp_forward(net, x, &cache, relu_last);
        for (auto& layer : net) layer.zero_grad();
        Mat dx = mlp_backward(net, cache, dy, relu_last);

        std::vector<double> analytic;
        for (const auto& layer : net) {
            analytic.insert(analytic.end(), layer.gradW.data.begin(), layer.gradW.data.end());
            analytic.insert(analytic.end(), layer.gradb.data.begin(), layer.gradb.data.end());
        }
        std::vector<double> numeric = finite_diff_grad(loss, flat, 1e-6);
        CHECK(max_relative_error(analytic, numeric) < 1e-4);

        // and dloss/dx against finite differences in the input
        auto loss_x = [&](const std::vector<double>& xi) {
            Mat xv(in, 1);
            xv.data = xi;
            Mat y = mlp_forward(net, xv, nullptr, relu_last);
            return dot(dy, y);
        };
        std::vector<double> numeric_x = finite_diff_grad(loss_x, x.data, 1e-6);
        CHECK(max_relative_error(dx.data, numeric_x) < 1e-4);
    }
}
