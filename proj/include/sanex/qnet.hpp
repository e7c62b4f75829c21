#pragma once

#include <string>
#include <vector>

#include "sanex/layers.hpp"
#include "sanex/noise.hpp"

namespace sanex {

enum class Strategy { plain, epsilon_greedy, noisynet, simple_sane, q_sane };

Strategy strategy_from_string(const std::string& s);
std::string strategy_to_string(Strategy s);
bool is_sane(Strategy s);
bool is_noise_strategy(Strategy s);  // noisynet or SANE variants

// Partitioned Q-network parameters: encoder (theta_b), perturbable head
// (theta_p), plus the strategy's noise parameters (per-parameter sigmas for
// NoisyNet, the perturbation module for SANE). For NoisyNet the head W/b
// play the role of the means.
struct QNetworkParams {
    Strategy strategy = Strategy::plain;
    int obs_width = 0;
    int n_actions = 0;
    std::vector<LinearLayer> encoder;
    std::vector<LinearLayer> head;
    std::vector<Mat> sigma_W, sigma_b;            // noisynet, mirror head shapes
    std::vector<Mat> grad_sigma_W, grad_sigma_b;  // ditto
    SaneModule sane;

    int encoder_out_width() const { return encoder.empty() ? obs_width : encoder.back().out_width(); }
    void zero_grad();
};

// Builds and initializes a network. encoder_widths / head_hidden may be
// empty. When plain_init is set every strategy draws its main weights
// exactly like the plain agent and zeroes all noise parameters (the
// degenerate-equivalence test mode).
QNetworkParams make_qnet(Strategy strategy, int obs_width, const std::vector<int>& encoder_widths,
                         const std::vector<int>& head_hidden, int n_actions, int sane_hidden,
                         Rng& rng, bool plain_init = false);

enum class QMode { clean, noisy };

struct QNetCache {
    QMode mode = QMode::clean;
    MlpCache enc;
    Mat h;
    // Sigma branch (SANE). When sigma_state differs from s the branch runs
    // its own encoder pass.
    bool own_sigma_encoder = false;
    MlpCache enc_sigma;
    Mat h_sigma;
    SaneCache sane_cache;
    double sigma = 0.0;
    bool has_clean_features = false;
    MlpCache clean_head;  // q_sane clean-Q feature pass
    // Head pass.
    bool plain_head = false;  // head ran unperturbed (clean mode / plain strategies)
    MlpCache head_mlp;        // used when plain_head
    std::vector<Mat> head_inputs;
    std::vector<Mat> head_pre;
    std::vector<FactoredNoise> noises;  // one per head layer in noisy modes
};

struct QForwardResult {
    Mat q;
    double sigma = 0.0;   // |sigma| probe value, SANE noisy mode only
    bool has_sigma = false;
};

// Strategy-dispatched forward pass. rng supplies the noise draws (may be
// null in clean mode). sigma_state, when given, is the state fed to the
// SANE sigma branch instead of s (the literal-pseudocode switch).
QForwardResult q_forward(const QNetworkParams& params, const Mat& s, Rng* rng, QMode mode,
                         QNetCache* cache = nullptr, const Mat* sigma_state = nullptr);

// Accumulates gradients (encoder, head, noise params) for a forward pass
// recorded in cache, given dloss/dq.
void q_backward(QNetworkParams& params, const QNetCache& cache, const Mat& dq);

std::size_t param_count(const QNetworkParams& p);
std::vector<double> flatten_params(const QNetworkParams& p);
std::vector<double> flatten_grads(const QNetworkParams& p);
void set_params_from_flat(QNetworkParams& p, const std::vector<double>& flat);

// Index of the first maximal entry of a column vector.
int argmax(const Mat& q);

}  // namespace sanex
