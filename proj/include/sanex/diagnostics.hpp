#pragma once

#include <map>
#include <string>
#include <vector>

#include "sanex/mat.hpp"
#include "sanex/qnet.hpp"

namespace sanex {

// KL(N(mu, diag(var)) || N(0, I)) = 0.5 * (-log|Sigma| + tr(Sigma) + |mu|^2 - k).
double gaussian_kl_diag(const std::vector<double>& mu, const std::vector<double>& var_diag);

// Default variance of the fixed near-delta posterior blocks for unperturbed
// parameters. Affects only reported KL values, never training.
inline constexpr double kDefaultFixedEps = 1e-12;

// Two-block NoisyNet KL: fixed-eps encoder block plus the learned per-
// parameter head block. Throws if any sigma entry is exactly zero.
double noisynet_kl(const QNetworkParams& params, double fixed_eps = kDefaultFixedEps);

// Structural description of the SANE posterior per state: k_fixed
// coordinates at variance fixed_eps (theta_b and Theta), k_head coordinates
// at variance sigma(h(s))^2 (theta_p).
struct KlBlocks {
    std::size_t k_fixed = 0;
    double mu_fixed_sqnorm = 0.0;
    std::size_t k_head = 0;
    double mu_head_sqnorm = 0.0;
};

KlBlocks kl_blocks_of(const QNetworkParams& params);
// Per-state KL for a given noise scale. Throws on sigma == 0.
double sane_state_kl(const KlBlocks& blocks, double sigma, double fixed_eps = kDefaultFixedEps);
// (1/N) sum_i KL(q(theta|s_i), p(theta)) with sigma from the perturbation
// module. Errors name the offending state on a zero sigma.
double sane_batch_kl(const QNetworkParams& params, const std::vector<Mat>& states,
                     double fixed_eps = kDefaultFixedEps);

// (agent - random) / (human - random).
double hns(double agent_score, double human, double random);

struct BaselineTable {
    // game -> (human, random)
    std::map<std::string, std::pair<double, double>> entries;
    static BaselineTable builtin();  // the shipped 11-game Atari table
    static BaselineTable load(const std::string& path);
};

double mean_hns(const std::map<std::string, double>& scores, const BaselineTable& baselines,
                const std::vector<std::string>& subset);

struct SigmaProbeReport {
    struct Entry {
        int state_id = 0;
        bool high_risk = false;
        double abs_sigma = 0.0;
    };
    std::vector<Entry> entries;
    double mean_high_risk = 0.0;
    double mean_low_risk = 0.0;
};

// Clean encoder pass then |sane_sigma| per probed state; no noise anywhere
// on this path. Requires a SANE strategy.
SigmaProbeReport sigma_probe(const QNetworkParams& params, const std::vector<Mat>& states,
                             const std::vector<bool>& high_risk,
                             const std::vector<int>* state_ids = nullptr);

}  // namespace sanex
