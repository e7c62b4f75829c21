#include "sanex/agent.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "sanex/diagnostics.hpp"

namespace sanex {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    ring_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
    if (size_ < capacity_) {
        ring_.push_back(std::move(t));
        ++size_;
        head_ = size_ % capacity_;
    } else {
        ring_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
    if (logical >= size_) throw std::out_of_range("ReplayBuffer::at");
    if (size_ < capacity_) return ring_[logical];
    return ring_[(head_ + logical) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample_batch(Rng& rng, std::size_t b) const {
    if (size_ < b || size_ == 0) throw std::runtime_error("sample_batch: underfull buffer");
    std::vector<const Transition*> out;
    out.reserve(b);
    for (std::size_t i = 0; i < b; ++i)
        out.push_back(&ring_[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(size_)))]);
    return out;
}

void TrainConfig::validate() const {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("config: gamma must be in [0,1]");
    if (batch_size < 1 || update_frequency < 1 || copy_frequency < 1 || buffer_capacity < 1)
        throw std::invalid_argument("config: counts must be positive");
    if (max_steps < 0 || warmup_transitions < 0) throw std::invalid_argument("config: negative step counts");
    if (max_steps > warmup_transitions && warmup_transitions < batch_size)
        throw std::invalid_argument("config: warmup_transitions must be >= batch_size");
    if (lr <= 0.0 || adam_eps <= 0.0) throw std::invalid_argument("config: lr and adam_eps must be positive");
    strategy_from_string(strategy);
}

double td_target(const Transition& t, const QNetworkParams& target, Rng& rng, double gamma) {
    if (t.done) return t.r;
    const QMode mode = is_noise_strategy(target.strategy) ? QMode::noisy : QMode::clean;
    QForwardResult res = q_forward(target, t.s_next, &rng, mode);
    double best = res.q(0, 0);
    for (int a = 1; a < res.q.rows; ++a) best = std::max(best, res.q(a, 0));
    return t.r + gamma * best;
}

double batch_loss_and_grads(QNetworkParams& qparams, const QNetworkParams& target,
                            const std::vector<const Transition*>& batch, Rng& rng, double gamma,
                            bool perturb_with_next_state, double* mean_abs_sigma) {
    if (batch.empty()) throw std::invalid_argument("batch_loss_and_grads: empty batch");
    const double b = static_cast<double>(batch.size());
    const QMode mode = is_noise_strategy(qparams.strategy) ? QMode::noisy : QMode::clean;
    double loss = 0.0;
    double sigma_acc = 0.0;
    QNetCache cache;
    for (const Transition* t : batch) {
        const Mat* sigma_state =
            (perturb_with_next_state && is_sane(qparams.strategy)) ? &t->s_next : nullptr;
        QForwardResult res = q_forward(qparams, t->s, &rng, mode, &cache, sigma_state);
        if (res.has_sigma) sigma_acc += res.sigma;
        const double tgt = td_target(*t, target, rng, gamma);
        const double err = res.q(t->a, 0) - tgt;
        loss += err * err / b;
        Mat dq(res.q.rows, 1);
        dq(t->a, 0) = 2.0 * err / b;
        q_backward(qparams, cache, dq);
    }
    if (mean_abs_sigma) *mean_abs_sigma = is_sane(qparams.strategy) ? sigma_acc / b : 0.0;
    return loss;
}

int select_action(const QNetworkParams& qparams, const Mat& s, Rng& rng_noise, Rng& rng_action,
                  double epsilon) {
    switch (qparams.strategy) {
        case Strategy::epsilon_greedy: {
            if (rng_action.uniform() < epsilon) return rng_action.uniform_int(qparams.n_actions);
            return argmax(q_forward(qparams, s, nullptr, QMode::clean).q);
        }
        case Strategy::plain:
            return argmax(q_forward(qparams, s, nullptr, QMode::clean).q);
        default:
            return argmax(q_forward(qparams, s, &rng_noise, QMode::noisy).q);
    }
}

QNetworkParams target_sync(const QNetworkParams& qparams) { return qparams; }

double epsilon_at(const TrainConfig& cfg, std::int64_t step) {
    const std::int64_t anneal = cfg.epsilon_anneal();
    if (anneal <= 0 || step >= anneal) return cfg.epsilon_end;
    return cfg.epsilon_start +
           (cfg.epsilon_end - cfg.epsilon_start) * static_cast<double>(step) / static_cast<double>(anneal);
}

QNetworkParams build_network(const TrainConfig& cfg, const EnvSpec& spec, Rng& rng_init) {
    std::vector<int> enc;
    if (cfg.encoder_hidden > 0) enc.push_back(cfg.encoder_hidden);
    std::vector<int> head;
    if (cfg.head_hidden > 0) head.push_back(cfg.head_hidden);
    return make_qnet(strategy_from_string(cfg.strategy), spec.obs_width, enc, head, spec.n_actions,
                     cfg.sane_hidden, rng_init, cfg.force_zero_noise);
}

namespace {

void zero_noise_grads(QNetworkParams& p) {
    for (auto& m : p.grad_sigma_W) m.fill(0.0);
    for (auto& m : p.grad_sigma_b) m.fill(0.0);
    if (!p.sane.empty()) p.sane.zero_grad();
}

double diagnostic_kl(const QNetworkParams& p, const std::vector<const Transition*>& batch) {
    try {
        if (p.strategy == Strategy::noisynet) return noisynet_kl(p);
        if (is_sane(p.strategy)) {
            std::vector<Mat> states;
            states.reserve(batch.size());
            for (const Transition* t : batch) states.push_back(t->s);
            return sane_batch_kl(p, states);
        }
    } catch (const std::exception&) {
        return std::numeric_limits<double>::quiet_NaN();  // log singularity: sigma hit zero
    }
    return 0.0;
}

}  // namespace

TrainResult train_loop(const TrainConfig& cfg) {
    cfg.validate();
    auto env = make_env(cfg.env, cfg.random_start);
    const EnvSpec& spec = env->spec();
    const int max_ep = cfg.max_episode_steps > 0 ? cfg.max_episode_steps : spec.max_episode_steps;
    const Strategy strat = strategy_from_string(cfg.strategy);

    Rng rng_init(derive_seed(cfg.seed, 1));
    Rng rng_env(derive_seed(cfg.seed, 2));
    Rng rng_noise(derive_seed(cfg.seed, 3));
    Rng rng_batch(derive_seed(cfg.seed, 4));

    TrainResult result;
    result.state.cfg = cfg;
    QNetworkParams& params = result.state.params;
    params = build_network(cfg, spec, rng_init);
    QNetworkParams target = target_sync(params);
    AdamState adam(param_count(params), cfg.lr, cfg.adam_eps);

    ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed_ms = [&]() -> double {
        if (!cfg.metrics_wallclock) return 0.0;
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    };

    std::int64_t step = 0, episode = 0, ep_steps = 0;
    double ep_return = 0.0, last_loss = 0.0, last_sigma = 0.0, last_kl = 0.0, last_ep_return = 0.0;
    Mat s = env->reset(rng_env);

    while (step < cfg.max_steps) {
        int a;
        const bool warmup = step < cfg.warmup_transitions;
        if (warmup && strat == Strategy::epsilon_greedy) {
            a = rng_env.uniform_int(spec.n_actions);
        } else {
            a = select_action(params, s, rng_noise, rng_env, epsilon_at(cfg, step));
        }
        StepResult sr = env->step(a);
        double r = sr.reward;
        if (cfg.clip_rewards) r = std::clamp(r, -1.0, 1.0);
        buffer.push(Transition{s, a, r, sr.obs, sr.done});
        ep_return += sr.reward;
        s = sr.obs;
        ++ep_steps;
        ++step;

        if (step > cfg.warmup_transitions &&
            (step - cfg.warmup_transitions) % cfg.update_frequency == 0 &&
            buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
            auto batch = buffer.sample_batch(rng_batch, static_cast<std::size_t>(cfg.batch_size));
            params.zero_grad();
            double mean_sigma = 0.0;
            const double loss = batch_loss_and_grads(params, target, batch, rng_noise, cfg.gamma,
                                                     cfg.perturb_with_next_state, &mean_sigma);
            if (!std::isfinite(loss))
                throw std::runtime_error("train_loop: non-finite loss at step " + std::to_string(step));
            if (cfg.force_zero_noise) zero_noise_grads(params);
            std::vector<double> flat = flatten_params(params);
            adam_step(flat, flatten_grads(params), adam);
            set_params_from_flat(params, flat);
            ++result.updates;
            last_loss = loss;
            last_sigma = mean_sigma;
            last_kl = diagnostic_kl(params, batch);
            if (result.updates % cfg.metrics_update_interval == 0)
                result.metrics.push_back(MetricsRow{step, episode, last_ep_return, last_loss,
                                                    last_sigma, last_kl, elapsed_ms()});
        }

        if (step % cfg.copy_frequency == 0) target = target_sync(params);

        if (sr.done || ep_steps >= max_ep) {
            last_ep_return = ep_return;
            result.metrics.push_back(
                MetricsRow{step, episode, ep_return, last_loss, last_sigma, last_kl, elapsed_ms()});
            ++episode;
            ep_return = 0.0;
            ep_steps = 0;
            s = env->reset(rng_env);
        }
    }

    result.episodes = episode;
    result.state.target = std::move(target);
    result.state.adam = std::move(adam);
    result.state.rng_env = rng_env.state();
    result.state.rng_noise = rng_noise.state();
    result.state.rng_batch = rng_batch.state();
    result.state.step = step;
    return result;
}

EvalResult evaluate(const QNetworkParams& params, Env& env, int episodes, Rng& rng, bool noise_on,
                    int max_episode_steps) {
    const int max_ep = max_episode_steps > 0 ? max_episode_steps : env.spec().max_episode_steps;
    EvalResult res;
    for (int e = 0; e < episodes; ++e) {
        Mat s = env.reset(rng);
        double ret = 0.0;
        for (int t = 0; t < max_ep; ++t) {
            const QMode mode = (noise_on && is_noise_strategy(params.strategy)) ? QMode::noisy : QMode::clean;
            const int a = argmax(q_forward(params, s, &rng, mode).q);
            StepResult sr = env.step(a);
            ret += sr.reward;
            s = sr.obs;
            if (sr.done) break;
        }
        res.returns.push_back(ret);
    }
    double mean = 0.0;
    for (double r : res.returns) mean += r;
    mean /= static_cast<double>(res.returns.empty() ? 1 : res.returns.size());
    double var = 0.0;
    for (double r : res.returns) var += (r - mean) * (r - mean);
    if (!res.returns.empty()) var /= static_cast<double>(res.returns.size());
    res.mean = mean;
    res.stddev = std::sqrt(var);
    return res;
}

}  // namespace sanex
