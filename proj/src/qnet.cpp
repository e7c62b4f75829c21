#include "sanex/qnet.hpp"

#include <cmath>
#include <stdexcept>

namespace sanex {

Strategy strategy_from_string(const std::string& s) {
    if (s == "plain") return Strategy::plain;
    if (s == "epsilon_greedy") return Strategy::epsilon_greedy;
    if (s == "noisynet") return Strategy::noisynet;
    if (s == "simple_sane") return Strategy::simple_sane;
    if (s == "q_sane") return Strategy::q_sane;
    throw std::invalid_argument("unknown strategy: " + s);
}

std::string strategy_to_string(Strategy s) {
    switch (s) {
        case Strategy::plain: return "plain";
        case Strategy::epsilon_greedy: return "epsilon_greedy";
        case Strategy::noisynet: return "noisynet";
        case Strategy::simple_sane: return "simple_sane";
        case Strategy::q_sane: return "q_sane";
    }
    throw std::logic_error("bad strategy enum");
}

bool is_sane(Strategy s) { return s == Strategy::simple_sane || s == Strategy::q_sane; }

bool is_noise_strategy(Strategy s) { return s == Strategy::noisynet || is_sane(s); }

void QNetworkParams::zero_grad() {
    for (auto& l : encoder) l.zero_grad();
    for (auto& l : head) l.zero_grad();
    for (auto& m : grad_sigma_W) m.fill(0.0);
    for (auto& m : grad_sigma_b) m.fill(0.0);
    if (!sane.empty()) sane.zero_grad();
}

QNetworkParams make_qnet(Strategy strategy, int obs_width, const std::vector<int>& encoder_widths,
                         const std::vector<int>& head_hidden, int n_actions, int sane_hidden,
                         Rng& rng, bool plain_init) {
    if (obs_width < 1 || n_actions < 1) throw std::invalid_argument("make_qnet: bad widths");
    QNetworkParams p;
    p.strategy = strategy;
    p.obs_width = obs_width;
    p.n_actions = n_actions;

    int w = obs_width;
    for (int next : encoder_widths) {
        p.encoder.emplace_back(next, w);
        w = next;
    }
    std::vector<int> head_widths = head_hidden;
    head_widths.push_back(n_actions);
    int hw = w;
    for (int next : head_widths) {
        p.head.emplace_back(next, hw);
        hw = next;
    }

    for (auto& l : p.encoder) glorot_uniform_init(rng, l);
    if (strategy == Strategy::noisynet && !plain_init) {
        // NoisyNet scheme: mu ~ U[-1/sqrt(l), 1/sqrt(l)], sigma = sigma0/sqrt(l).
        const double sigma0 = 0.5;
        for (auto& l : p.head) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(l.in_width()));
            for (double& v : l.W.data) v = rng.uniform(-bound, bound);
            for (double& v : l.b.data) v = rng.uniform(-bound, bound);
        }
        for (auto& l : p.head) {
            const double s0 = sigma0 / std::sqrt(static_cast<double>(l.in_width()));
            Mat sw(l.W.rows, l.W.cols);
            sw.fill(s0);
            Mat sb(l.b.rows, 1);
            sb.fill(s0);
            p.sigma_W.push_back(std::move(sw));
            p.sigma_b.push_back(std::move(sb));
        }
    } else {
        for (auto& l : p.head) glorot_uniform_init(rng, l);
        if (strategy == Strategy::noisynet) {
            for (auto& l : p.head) {
                p.sigma_W.emplace_back(l.W.rows, l.W.cols);
                p.sigma_b.emplace_back(l.b.rows, 1);
            }
        }
    }
    for (std::size_t i = 0; i < p.sigma_W.size(); ++i) {
        p.grad_sigma_W.emplace_back(p.sigma_W[i].rows, p.sigma_W[i].cols);
        p.grad_sigma_b.emplace_back(p.sigma_b[i].rows, 1);
    }

    if (is_sane(strategy)) {
        const int extra = (strategy == Strategy::q_sane) ? n_actions : 0;
        p.sane = SaneModule(p.encoder_out_width() + extra, sane_hidden);
        if (!plain_init) {
            he_normal_init(rng, p.sane.hidden);
            he_normal_init(rng, p.sane.out);
        }
    }
    return p;
}

namespace {

Mat relu_prime_mask(Mat d, const Mat& pre) {
    for (std::size_t i = 0; i < d.data.size(); ++i)
        if (pre.data[i] <= 0.0) d.data[i] = 0.0;
    return d;
}

}  // namespace

QForwardResult q_forward(const QNetworkParams& params, const Mat& s, Rng* rng, QMode mode,
                         QNetCache* cache, const Mat* sigma_state) {
    if (s.rows != params.obs_width || s.cols != 1)
        throw std::invalid_argument("q_forward: observation width mismatch");
    QNetCache local;
    QNetCache& c = cache ? *cache : local;
    c = QNetCache{};
    c.mode = mode;

    c.h = mlp_forward(params.encoder, s, &c.enc, /*relu_after_last=*/true);

    QForwardResult res;
    const bool noisy = (mode == QMode::noisy) && is_noise_strategy(params.strategy);
    if (!noisy) {
        c.plain_head = true;
        res.q = mlp_forward(params.head, c.h, &c.head_mlp, /*relu_after_last=*/false);
        return res;
    }
    if (!rng) throw std::invalid_argument("q_forward: noisy mode requires an rng");

    if (is_sane(params.strategy)) {
        const Mat* sig_s = sigma_state ? sigma_state : &s;
        const Mat* h_sig = &c.h;
        if (sigma_state) {
            c.own_sigma_encoder = true;
            c.h_sigma = mlp_forward(params.encoder, *sig_s, &c.enc_sigma, /*relu_after_last=*/true);
            h_sig = &c.h_sigma;
        }
        Mat q_clean;
        const Mat* extra = nullptr;
        if (params.strategy == Strategy::q_sane) {
            c.has_clean_features = true;
            q_clean = mlp_forward(params.head, *h_sig, &c.clean_head, /*relu_after_last=*/false);
            extra = &q_clean;
        }
        c.sigma = sane_sigma(params.sane, *h_sig, extra, &c.sane_cache);
        res.sigma = std::fabs(c.sigma);
        res.has_sigma = true;

        Mat cur = c.h;
        for (std::size_t j = 0; j < params.head.size(); ++j) {
            const LinearLayer& layer = params.head[j];
            c.noises.push_back(sample_factored(*rng, layer.in_width(), layer.out_width()));
            c.head_inputs.push_back(cur);
            Mat u = sane_perturbed_forward(layer, c.sigma, c.noises.back(), cur);
            c.head_pre.push_back(u);
            cur = (j + 1 == params.head.size()) ? u : relu(u);
        }
        res.q = cur;
        return res;
    }

    // noisynet
    Mat cur = c.h;
    for (std::size_t j = 0; j < params.head.size(); ++j) {
        const LinearLayer& layer = params.head[j];
        c.noises.push_back(sample_factored(*rng, layer.in_width(), layer.out_width()));
        const FactoredNoise& n = c.noises.back();
        c.head_inputs.push_back(cur);
        Mat u(layer.out_width(), 1);
        for (int i = 0; i < layer.W.rows; ++i) {
            // bias after the product sum, mirroring mlp_forward so zero
            // sigmas reproduce the plain layer bitwise
            double acc = 0.0;
            for (int k = 0; k < layer.W.cols; ++k)
                acc += (layer.W(i, k) + params.sigma_W[j](i, k) * n.eps_w(i, k)) * cur(k, 0);
            u(i, 0) = acc + (layer.b(i, 0) + params.sigma_b[j](i, 0) * n.eps_b(i, 0));
        }
        c.head_pre.push_back(u);
        cur = (j + 1 == params.head.size()) ? u : relu(u);
    }
    res.q = cur;
    return res;
}

void q_backward(QNetworkParams& params, const QNetCache& cache, const Mat& dq) {
    Mat dh;
    if (cache.plain_head) {
        dh = mlp_backward(params.head, cache.head_mlp, dq, /*relu_after_last=*/false);
    } else if (is_sane(params.strategy)) {
        Mat d = dq;
        double dsigma = 0.0;
        for (int j = static_cast<int>(params.head.size()) - 1; j >= 0; --j) {
            const auto uj = static_cast<std::size_t>(j);
            Mat du = (j + 1 == static_cast<int>(params.head.size()))
                         ? d
                         : relu_prime_mask(d, cache.head_pre[uj]);
            d = sane_perturbed_backward(params.head[uj], cache.sigma, cache.noises[uj],
                                        cache.head_inputs[uj], du, &dsigma);
        }
        dh = d;
        Mat dv = sane_sigma_backward(params.sane, cache.sane_cache, dsigma);
        Mat dh_sig(params.encoder_out_width(), 1);
        for (int i = 0; i < dh_sig.rows; ++i) dh_sig(i, 0) = dv(i, 0);
        if (cache.has_clean_features) {
            Mat dq_clean(params.n_actions, 1);
            for (int i = 0; i < params.n_actions; ++i) dq_clean(i, 0) = dv(dh_sig.rows + i, 0);
            Mat back = mlp_backward(params.head, cache.clean_head, dq_clean, /*relu_after_last=*/false);
            for (int i = 0; i < dh_sig.rows; ++i) dh_sig(i, 0) += back(i, 0);
        }
        if (cache.own_sigma_encoder) {
            mlp_backward(params.encoder, cache.enc_sigma, dh_sig, /*relu_after_last=*/true);
        } else {
            for (int i = 0; i < dh.rows; ++i) dh(i, 0) += dh_sig(i, 0);
        }
    } else {
        // noisynet
        Mat d = dq;
        for (int j = static_cast<int>(params.head.size()) - 1; j >= 0; --j) {
            const auto uj = static_cast<std::size_t>(j);
            Mat du = (j + 1 == static_cast<int>(params.head.size()))
                         ? d
                         : relu_prime_mask(d, cache.head_pre[uj]);
            const Mat& x = cache.head_inputs[uj];
            const FactoredNoise& n = cache.noises[uj];
            LinearLayer& layer = params.head[uj];
            Mat dx(x.rows, 1);
            for (int i = 0; i < layer.W.rows; ++i) {
                const double g = du(i, 0);
                layer.gradb(i, 0) += g;
                params.grad_sigma_b[uj](i, 0) += g * n.eps_b(i, 0);
                for (int k = 0; k < layer.W.cols; ++k) {
                    layer.gradW(i, k) += g * x(k, 0);
                    params.grad_sigma_W[uj](i, k) += g * x(k, 0) * n.eps_w(i, k);
                    dx(k, 0) += (layer.W(i, k) + params.sigma_W[uj](i, k) * n.eps_w(i, k)) * g;
                }
            }
            d = dx;
        }
        dh = d;
    }
    mlp_backward(params.encoder, cache.enc, dh, /*relu_after_last=*/true);
}

namespace {

template <typename Fn>
void for_each_param_mat(const QNetworkParams& p, Fn&& fn) {
    for (const auto& l : p.encoder) {
        fn(l.W, l.gradW);
        fn(l.b, l.gradb);
    }
    for (const auto& l : p.head) {
        fn(l.W, l.gradW);
        fn(l.b, l.gradb);
    }
    for (std::size_t i = 0; i < p.sigma_W.size(); ++i) {
        fn(p.sigma_W[i], p.grad_sigma_W[i]);
        fn(p.sigma_b[i], p.grad_sigma_b[i]);
    }
    if (!p.sane.empty()) {
        fn(p.sane.hidden.W, p.sane.hidden.gradW);
        fn(p.sane.hidden.b, p.sane.hidden.gradb);
        fn(p.sane.out.W, p.sane.out.gradW);
        fn(p.sane.out.b, p.sane.out.gradb);
    }
}

}  // namespace

std::size_t param_count(const QNetworkParams& p) {
    std::size_t n = 0;
    for_each_param_mat(p, [&](const Mat& w, const Mat&) { n += w.size(); });
    return n;
}

std::vector<double> flatten_params(const QNetworkParams& p) {
    std::vector<double> out;
    out.reserve(param_count(p));
    for_each_param_mat(p, [&](const Mat& w, const Mat&) {
        out.insert(out.end(), w.data.begin(), w.data.end());
    });
    return out;
}

std::vector<double> flatten_grads(const QNetworkParams& p) {
    std::vector<double> out;
    out.reserve(param_count(p));
    for_each_param_mat(p, [&](const Mat&, const Mat& g) {
        out.insert(out.end(), g.data.begin(), g.data.end());
    });
    return out;
}

void set_params_from_flat(QNetworkParams& p, const std::vector<double>& flat) {
    if (flat.size() != param_count(p))
        throw std::invalid_argument("set_params_from_flat: size mismatch");
    std::size_t pos = 0;
    for_each_param_mat(p, [&](const Mat& w, const Mat&) {
        Mat& mw = const_cast<Mat&>(w);
        for (double& v : mw.data) v = flat[pos++];
    });
}

int argmax(const Mat& q) {
    int best = 0;
    for (int i = 1; i < q.rows; ++i)
        if (q(i, 0) > q(best, 0)) best = i;
    return best;
}

}  // namespace sanex
