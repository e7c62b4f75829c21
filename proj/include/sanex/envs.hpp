#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sanex/mat.hpp"
#include "sanex/rng.hpp"

namespace sanex {

struct EnvSpec {
    std::string name;
    int obs_width = 0;
    int n_actions = 0;
    int max_episode_steps = 0;
};

struct StepResult {
    Mat obs;
    double reward = 0.0;
    bool done = false;
};

class Env {
public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual Mat reset(Rng& rng) = 0;
    // Throws if called after a terminal step without an intervening reset.
    virtual StepResult step(int action) = 0;
    // Current state id in the tabular model (for oracle checks and probes).
    virtual int state_id() const = 0;
    virtual Mat observe(int state_id) const = 0;
};

// Deterministic tabular MDP: (s, a) -> (s', r), terminal set.
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<int> next;        // n_states * n_actions
    std::vector<double> reward;   // n_states * n_actions
    std::vector<char> terminal;   // n_states

    std::size_t idx(int s, int a) const { return static_cast<std::size_t>(s) * n_actions + a; }
};

// Bellman optimality iteration to max-norm tolerance; returns the Q table
// (n_states x n_actions). Rejects gamma >= 1.
Mat value_iteration(const TabularMdp& mdp, double gamma, double tol);
// Greedy policy from a Q table, ties to the lowest action.
std::vector<int> greedy_policy(const Mat& q);

// n-state chain, actions {left=0, right=1}; state n-1 is terminal and is
// reached with reward 1 by moving right from state n-2. One-hot
// observations of width n.
class ChainEnv : public Env {
public:
    explicit ChainEnv(int n);
    const EnvSpec& spec() const override { return spec_; }
    Mat reset(Rng& rng) override;
    StepResult step(int action) override;
    int state_id() const override { return state_; }
    Mat observe(int state_id) const override;
    const TabularMdp& mdp() const { return mdp_; }

private:
    EnvSpec spec_;
    TabularMdp mdp_;
    int n_;
    int state_ = 0;
    bool done_ = true;
};

// Open field (low risk: all moves clamp safely) feeding a 1-cell-wide
// bridge over a cliff (high risk: off-bridge moves terminate with -1), goal
// beyond the bridge worth +1. Observations: normalized (x, y) plus a
// one-hot {field, bridge} region flag.
class CliffBridgeEnv : public Env {
public:
    CliffBridgeEnv(int field_width = 5, int bridge_len = 6, bool random_start = false);
    const EnvSpec& spec() const override { return spec_; }
    Mat reset(Rng& rng) override;
    StepResult step(int action) override;
    int state_id() const override;
    Mat observe(int state_id) const override;

    int n_cells() const { return field_w_ * field_w_ + bridge_len_; }
    bool high_risk(int state_id) const;  // bridge cells
    TabularMdp mdp() const;
    int optimal_path_len() const;  // steps from the fixed start to the goal

private:
    int cell_id(int x, int y) const;
    void cell_xy(int id, int* x, int* y) const;

    EnvSpec spec_;
    int field_w_;
    int bridge_len_;
    bool random_start_;
    int x_ = 0, y_ = 0;
    bool done_ = true;
};

// Registry keyed by the TrainConfig env name: "chain<N>" (e.g. "chain5")
// or "cliff_bridge". Unknown names throw.
std::unique_ptr<Env> make_env(const std::string& name, bool random_start = false);

}  // namespace sanex
