#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sanex/adam.hpp"
#include "sanex/envs.hpp"
#include "sanex/mat.hpp"
#include "sanex/qnet.hpp"
#include "sanex/rng.hpp"

namespace sanex {

struct Transition {
    Mat s;
    int a = 0;
    double r = 0.0;
    Mat s_next;
    bool done = false;
};

// Ring buffer; oldest entry evicted first once full.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);
    void push(Transition t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t logical) const;  // 0 = oldest
    // b independent uniform draws with replacement; throws on an underfull buffer.
    std::vector<const Transition*> sample_batch(Rng& rng, std::size_t b) const;

private:
    std::size_t capacity_;
    std::vector<Transition> ring_;
    std::size_t head_ = 0;  // next write slot
    std::size_t size_ = 0;
};

struct TrainConfig {
    std::string env = "cliff_bridge";
    std::string strategy = "simple_sane";
    double gamma = 0.99;
    double lr = 6.25e-5;
    double adam_eps = 1.5e-4;
    int batch_size = 32;
    int update_frequency = 4;
    int copy_frequency = 1000;
    int buffer_capacity = 50000;
    int warmup_transitions = 1000;
    std::int64_t max_steps = 100000;
    int max_episode_steps = 0;  // 0: use the env default
    double epsilon_start = 1.0;
    double epsilon_end = 0.01;
    std::int64_t epsilon_anneal_steps = 0;  // 0: first 10% of max_steps
    std::uint64_t seed = 0;
    int eval_episodes = 10;
    bool eval_noise = false;
    bool clip_rewards = true;
    int sane_hidden = 256;
    int encoder_hidden = 32;
    int head_hidden = 64;
    bool force_zero_noise = false;
    // Perturb the Q network from h(s') as in the literal pseudocode instead
    // of from the evaluated state h(s).
    bool perturb_with_next_state = false;
    bool random_start = false;
    // Real wall-clock timestamps in metrics; off by default so identical
    // runs produce byte-identical metrics files.
    bool metrics_wallclock = false;
    int metrics_update_interval = 1;  // emit an update row every N updates

    void validate() const;
    std::int64_t epsilon_anneal() const { return epsilon_anneal_steps > 0 ? epsilon_anneal_steps : max_steps / 10; }
};

struct MetricsRow {
    std::int64_t step = 0;
    std::int64_t episode = 0;
    double episode_return = 0.0;  // unclipped, last completed episode
    double loss = 0.0;            // last batch
    double mean_abs_sigma = 0.0;  // over batch, SANE only
    double kl_term = 0.0;         // diagnostic
    double wallclock_ms = 0.0;
};

// TD target for one transition: r when done, else r + gamma * max_a
// Q_target(s') with the target forward in noisy mode for noise strategies.
double td_target(const Transition& t, const QNetworkParams& target, Rng& rng, double gamma);

// Mean squared TD error over the batch; fresh noise per example for both
// nets (Q-net draws first, then target); gradients accumulate into qparams.
// The target side contributes no gradient.
double batch_loss_and_grads(QNetworkParams& qparams, const QNetworkParams& target,
                            const std::vector<const Transition*>& batch, Rng& rng, double gamma,
                            bool perturb_with_next_state = false, double* mean_abs_sigma = nullptr);

// Greedy over noisy q for noise strategies (fresh noise this call),
// epsilon-greedy / clean greedy otherwise. Ties to the lowest index.
int select_action(const QNetworkParams& qparams, const Mat& s, Rng& rng_noise, Rng& rng_action,
                  double epsilon);

// Deep copy of all parameters including noise params.
QNetworkParams target_sync(const QNetworkParams& qparams);

double epsilon_at(const TrainConfig& cfg, std::int64_t step);

struct TrainState {
    TrainConfig cfg;
    QNetworkParams params;
    QNetworkParams target;
    AdamState adam;
    Rng::State rng_env;
    Rng::State rng_noise;
    Rng::State rng_batch;
    std::int64_t step = 0;
};

struct TrainResult {
    TrainState state;
    std::vector<MetricsRow> metrics;
    std::int64_t updates = 0;
    std::int64_t episodes = 0;
};

QNetworkParams build_network(const TrainConfig& cfg, const EnvSpec& spec, Rng& rng_init);
TrainResult train_loop(const TrainConfig& cfg);

struct EvalResult {
    double mean = 0.0;
    double stddev = 0.0;  // population stddev over episodes
    std::vector<double> returns;
};

// Greedy rollouts; noise_on uses the noisy-mode forward each step.
EvalResult evaluate(const QNetworkParams& params, Env& env, int episodes, Rng& rng, bool noise_on,
                    int max_episode_steps = 0);

}  // namespace sanex
