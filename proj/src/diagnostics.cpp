#include "sanex/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sanex/layers.hpp"

namespace sanex {

double gaussian_kl_diag(const std::vector<double>& mu, const std::vector<double>& var_diag) {
    if (mu.size() != var_diag.size()) throw std::invalid_argument("gaussian_kl_diag: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double v = var_diag[i];
        if (v <= 0.0) throw std::invalid_argument("gaussian_kl_diag: non-positive variance");
        acc += -std::log(v) + v + mu[i] * mu[i] - 1.0;
    }
    return 0.5 * acc;
}

namespace {

void accumulate_layer(const LinearLayer& l, std::size_t* k, double* sqnorm) {
    *k += l.W.size() + l.b.size();
    for (double w : l.W.data) *sqnorm += w * w;
    for (double b : l.b.data) *sqnorm += b * b;
}

double fixed_block_kl(std::size_t k, double sqnorm, double eps) {
    const double kd = static_cast<double>(k);
    return 0.5 * (-kd * std::log(eps) + kd * eps + sqnorm - kd);
}

}  // namespace

double noisynet_kl(const QNetworkParams& params, double fixed_eps) {
    if (params.strategy != Strategy::noisynet)
        throw std::invalid_argument("noisynet_kl: not a noisynet parameter set");
    std::size_t k1 = 0;
    double mu_c = 0.0;
    for (const auto& l : params.encoder) accumulate_layer(l, &k1, &mu_c);
    double head = 0.0;
    std::size_t k2 = 0;
    for (std::size_t j = 0; j < params.head.size(); ++j) {
        const LinearLayer& l = params.head[j];
        auto term = [&](double mu, double sigma) {
            if (sigma == 0.0) throw std::domain_error("noisynet_kl: sigma entry is zero (log term is -inf)");
            const double v = sigma * sigma;
            head += -std::log(v) + v + mu * mu - 1.0;
            ++k2;
        };
        for (std::size_t i = 0; i < l.W.size(); ++i) term(l.W.data[i], params.sigma_W[j].data[i]);
        for (std::size_t i = 0; i < l.b.size(); ++i) term(l.b.data[i], params.sigma_b[j].data[i]);
    }
    return fixed_block_kl(k1, mu_c, fixed_eps) + 0.5 * head;
}

KlBlocks kl_blocks_of(const QNetworkParams& params) {
    KlBlocks b;
    for (const auto& l : params.encoder) accumulate_layer(l, &b.k_fixed, &b.mu_fixed_sqnorm);
    if (!params.sane.empty()) {
        accumulate_layer(params.sane.hidden, &b.k_fixed, &b.mu_fixed_sqnorm);
        accumulate_layer(params.sane.out, &b.k_fixed, &b.mu_fixed_sqnorm);
    }
    for (const auto& l : params.head) accumulate_layer(l, &b.k_head, &b.mu_head_sqnorm);
    return b;
}

double sane_state_kl(const KlBlocks& blocks, double sigma, double fixed_eps) {
    if (sigma == 0.0) throw std::domain_error("sane_state_kl: sigma is zero (log term is -inf)");
    const double v = sigma * sigma;
    const double kh = static_cast<double>(blocks.k_head);
    const double head = 0.5 * (-kh * std::log(v) + kh * v + blocks.mu_head_sqnorm - kh);
    return fixed_block_kl(blocks.k_fixed, blocks.mu_fixed_sqnorm, fixed_eps) + head;
}

double sane_batch_kl(const QNetworkParams& params, const std::vector<Mat>& states, double fixed_eps) {
    if (!is_sane(params.strategy)) throw std::invalid_argument("sane_batch_kl: not a SANE parameter set");
    if (states.empty()) throw std::invalid_argument("sane_batch_kl: empty batch");
    const KlBlocks blocks = kl_blocks_of(params);
    double acc = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        Mat h = mlp_forward(params.encoder, states[i], nullptr, /*relu_after_last=*/true);
        double sigma;
        if (params.strategy == Strategy::q_sane) {
            Mat q_clean = mlp_forward(params.head, h, nullptr, /*relu_after_last=*/false);
            sigma = sane_sigma(params.sane, h, &q_clean);
        } else {
            sigma = sane_sigma(params.sane, h, nullptr);
        }
        if (sigma == 0.0)
            throw std::domain_error("sane_batch_kl: sigma is zero at batch state " + std::to_string(i));
        acc += sane_state_kl(blocks, sigma, fixed_eps);
    }
    return acc / static_cast<double>(states.size());
}

double hns(double agent_score, double human, double random) {
    const double denom = human - random;
    if (denom == 0.0) throw std::invalid_argument("hns: human and random baselines are equal");
    return (agent_score - random) / denom;
}

BaselineTable BaselineTable::builtin() {
    BaselineTable t;
    t.entries = {
        {"Asterix", {8503.0, 210.0}},      {"Atlantis", {29028.0, 12850.0}},
        {"Boxing", {12.1, 0.1}},           {"Bowling", {160.7, 23.1}},
        {"Enduro", {860.5, 0.0}},          {"FishingDerby", {-38.7, -91.7}},
        {"IceHockey", {0.9, -11.2}},       {"Qbert", {13455.0, 163.9}},
        {"Riverraid", {17118.0, 1338.5}},  {"RoadRunner", {7845.0, 11.5}},
        {"Seaquest", {42054.0, 68.4}},
    };
    return t;
}

BaselineTable BaselineTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open baseline table: " + path);
    BaselineTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string game, hs, rs;
        if (!std::getline(ss, game, ',') || !std::getline(ss, hs, ',') || !std::getline(ss, rs))
            throw std::runtime_error("malformed baseline line in " + path + ": " + line);
        if (game == "game") continue;  // header
        t.entries[game] = {std::stod(hs), std::stod(rs)};
    }
    return t;
}

double mean_hns(const std::map<std::string, double>& scores, const BaselineTable& baselines,
                const std::vector<std::string>& subset) {
    if (subset.empty()) throw std::invalid_argument("mean_hns: empty subset");
    double acc = 0.0;
    for (const std::string& game : subset) {
        auto s = scores.find(game);
        auto b = baselines.entries.find(game);
        if (s == scores.end()) throw std::invalid_argument("mean_hns: missing score for " + game);
        if (b == baselines.entries.end()) throw std::invalid_argument("mean_hns: missing baseline for " + game);
        acc += hns(s->second, b->second.first, b->second.second);
    }
    return acc / static_cast<double>(subset.size());
}

SigmaProbeReport sigma_probe(const QNetworkParams& params, const std::vector<Mat>& states,
                             const std::vector<bool>& high_risk, const std::vector<int>* state_ids) {
    if (!is_sane(params.strategy)) throw std::invalid_argument("sigma_probe: not a SANE parameter set");
    if (states.size() != high_risk.size()) throw std::invalid_argument("sigma_probe: label count mismatch");
    SigmaProbeReport rep;
    double sum_hi = 0.0, sum_lo = 0.0;
    std::size_t n_hi = 0, n_lo = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        Mat h = mlp_forward(params.encoder, states[i], nullptr, /*relu_after_last=*/true);
        double sigma;
        if (params.strategy == Strategy::q_sane) {
            Mat q_clean = mlp_forward(params.head, h, nullptr, /*relu_after_last=*/false);
            sigma = sane_sigma(params.sane, h, &q_clean);
        } else {
            sigma = sane_sigma(params.sane, h, nullptr);
        }
        const double a = std::fabs(sigma);
        const int id = state_ids ? (*state_ids)[i] : static_cast<int>(i);
        rep.entries.push_back({id, high_risk[i], a});
        if (high_risk[i]) {
            sum_hi += a;
            ++n_hi;
        } else {
            sum_lo += a;
            ++n_lo;
        }
    }
    rep.mean_high_risk = n_hi ? sum_hi / static_cast<double>(n_hi) : 0.0;
    rep.mean_low_risk = n_lo ? sum_lo / static_cast<double>(n_lo) : 0.0;
    return rep;
}

}  // namespace sanex
