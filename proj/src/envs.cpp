#include "sanex/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace sanex {

Mat value_iteration(const TabularMdp& mdp, double gamma, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("value_iteration: tol must be positive");
    if (gamma >= 1.0 || gamma < 0.0) throw std::invalid_argument("value_iteration: gamma must be in [0, 1)");
    Mat q(mdp.n_states, mdp.n_actions);
    while (true) {
        double delta = 0.0;
        Mat next_q(mdp.n_states, mdp.n_actions);
        for (int s = 0; s < mdp.n_states; ++s) {
            for (int a = 0; a < mdp.n_actions; ++a) {
                if (mdp.terminal[static_cast<std::size_t>(s)]) {
                    next_q(s, a) = 0.0;
                    continue;
                }
                const int s2 = mdp.next[mdp.idx(s, a)];
                double best = 0.0;
                if (!mdp.terminal[static_cast<std::size_t>(s2)]) {
                    best = q(s2, 0);
                    for (int b = 1; b < mdp.n_actions; ++b) best = std::max(best, q(s2, b));
                }
                next_q(s, a) = mdp.reward[mdp.idx(s, a)] + gamma * best;
                delta = std::max(delta, std::fabs(next_q(s, a) - q(s, a)));
            }
        }
        q = next_q;
        if (delta < tol) break;
    }
    return q;
}

std::vector<int> greedy_policy(const Mat& q) {
    std::vector<int> pi(static_cast<std::size_t>(q.rows));
    for (int s = 0; s < q.rows; ++s) {
        int best = 0;
        for (int a = 1; a < q.cols; ++a)
            if (q(s, a) > q(s, best)) best = a;
        pi[static_cast<std::size_t>(s)] = best;
    }
    return pi;
}

ChainEnv::ChainEnv(int n) : n_(n) {
    if (n < 2) throw std::invalid_argument("ChainEnv: need at least 2 states");
    spec_ = EnvSpec{"chain" + std::to_string(n), n, 2, 100};
    mdp_.n_states = n;
    mdp_.n_actions = 2;
    mdp_.next.resize(static_cast<std::size_t>(n) * 2);
    mdp_.reward.assign(static_cast<std::size_t>(n) * 2, 0.0);
    mdp_.terminal.assign(static_cast<std::size_t>(n), 0);
    mdp_.terminal[static_cast<std::size_t>(n - 1)] = 1;
    for (int s = 0; s < n; ++s) {
        mdp_.next[mdp_.idx(s, 0)] = std::max(s - 1, 0);
        mdp_.next[mdp_.idx(s, 1)] = std::min(s + 1, n - 1);
        if (s + 1 == n - 1) mdp_.reward[mdp_.idx(s, 1)] = 1.0;
    }
    mdp_.next[mdp_.idx(n - 1, 0)] = n - 1;
    mdp_.next[mdp_.idx(n - 1, 1)] = n - 1;
    mdp_.reward[mdp_.idx(n - 1, 1)] = 0.0;
}

Mat ChainEnv::observe(int state_id) const {
    Mat o(n_, 1);
    o(state_id, 0) = 1.0;
    return o;
}

Mat ChainEnv::reset(Rng&) {
    state_ = 0;
    done_ = false;
    return observe(state_);
}

StepResult ChainEnv::step(int action) {
    if (done_) throw std::logic_error("ChainEnv: step after episode end");
    if (action < 0 || action >= 2) throw std::invalid_argument("ChainEnv: bad action");
    const double r = mdp_.reward[mdp_.idx(state_, action)];
    state_ = mdp_.next[mdp_.idx(state_, action)];
    done_ = mdp_.terminal[static_cast<std::size_t>(state_)] != 0;
    return StepResult{observe(state_), r, done_};
}

CliffBridgeEnv::CliffBridgeEnv(int field_width, int bridge_len, bool random_start)
    : field_w_(field_width), bridge_len_(bridge_len), random_start_(random_start) {
    if (field_width < 2 || bridge_len < 1) throw std::invalid_argument("CliffBridgeEnv: bad geometry");
    spec_ = EnvSpec{"cliff_bridge", 4, 4, 200};
}

int CliffBridgeEnv::cell_id(int x, int y) const {
    if (x < field_w_) return y * field_w_ + x;
    return field_w_ * field_w_ + (x - field_w_);
}

void CliffBridgeEnv::cell_xy(int id, int* x, int* y) const {
    if (id < field_w_ * field_w_) {
        *x = id % field_w_;
        *y = id / field_w_;
    } else {
        *x = field_w_ + (id - field_w_ * field_w_);
        *y = field_w_ / 2;
    }
}

bool CliffBridgeEnv::high_risk(int state_id) const { return state_id >= field_w_ * field_w_; }

int CliffBridgeEnv::state_id() const { return cell_id(x_, y_); }

Mat CliffBridgeEnv::observe(int state_id) const {
    if (state_id < 0) return Mat(4, 1);  // terminal sink, content unused
    int x, y;
    cell_xy(state_id, &x, &y);
    Mat o(4, 1);
    o(0, 0) = static_cast<double>(x) / (field_w_ + bridge_len_ - 1);
    o(1, 0) = static_cast<double>(y) / (field_w_ - 1);
    o(2, 0) = high_risk(state_id) ? 0.0 : 1.0;
    o(3, 0) = high_risk(state_id) ? 1.0 : 0.0;
    return o;
}

Mat CliffBridgeEnv::reset(Rng& rng) {
    if (random_start_) {
        // any standing cell is a safe start, bridge included: the cells
        // themselves are never lethal, only stepping off the bridge is
        cell_xy(rng.uniform_int(n_cells()), &x_, &y_);
    } else {
        x_ = 0;
        y_ = 0;
    }
    done_ = false;
    return observe(cell_id(x_, y_));
}

StepResult CliffBridgeEnv::step(int action) {
    if (done_) throw std::logic_error("CliffBridgeEnv: step after episode end");
    if (action < 0 || action >= 4) throw std::invalid_argument("CliffBridgeEnv: bad action");
    const int mid = field_w_ / 2;
    int nx = x_, ny = y_;
    switch (action) {
        case 0: ny -= 1; break;  // up
        case 1: ny += 1; break;  // down
        case 2: nx -= 1; break;  // left
        case 3: nx += 1; break;  // right
    }
    const bool on_bridge = x_ >= field_w_;
    if (on_bridge) {
        if (ny != y_) {  // off the bridge: crash
            done_ = true;
            return StepResult{observe(-1), -1.0, true};
        }
        if (nx == field_w_ + bridge_len_) {  // goal
            done_ = true;
            return StepResult{observe(-1), 1.0, true};
        }
        x_ = nx;
        return StepResult{observe(cell_id(x_, y_)), 0.0, false};
    }
    // field: moves clamp at the boundary; the only exit is the bridge row
    if (nx < 0 || ny < 0 || ny >= field_w_) {
        nx = x_;
        ny = y_;
    } else if (nx >= field_w_ && y_ != mid) {
        nx = x_;
    }
    x_ = nx;
    y_ = ny;
    return StepResult{observe(cell_id(x_, y_)), 0.0, false};
}

TabularMdp CliffBridgeEnv::mdp() const {
    // Cells plus two absorbing terminals: crash, goal.
    const int n = n_cells();
    TabularMdp m;
    m.n_states = n + 2;
    m.n_actions = 4;
    const int crash = n;
    const int goal = n + 1;
    m.next.resize(static_cast<std::size_t>(m.n_states) * 4);
    m.reward.assign(static_cast<std::size_t>(m.n_states) * 4, 0.0);
    m.terminal.assign(static_cast<std::size_t>(m.n_states), 0);
    m.terminal[static_cast<std::size_t>(crash)] = 1;
    m.terminal[static_cast<std::size_t>(goal)] = 1;
    for (int t = crash; t <= goal; ++t)
        for (int a = 0; a < 4; ++a) m.next[m.idx(t, a)] = t;
    const int mid = field_w_ / 2;
    for (int s = 0; s < n; ++s) {
        int x, y;
        cell_xy(s, &x, &y);
        for (int a = 0; a < 4; ++a) {
            int nx = x, ny = y;
            switch (a) {
                case 0: ny -= 1; break;
                case 1: ny += 1; break;
                case 2: nx -= 1; break;
                case 3: nx += 1; break;
            }
            if (x >= field_w_) {  // bridge
                if (ny != y) {
                    m.next[m.idx(s, a)] = crash;
                    m.reward[m.idx(s, a)] = -1.0;
                } else if (nx == field_w_ + bridge_len_) {
                    m.next[m.idx(s, a)] = goal;
                    m.reward[m.idx(s, a)] = 1.0;
                } else {
                    m.next[m.idx(s, a)] = cell_id(nx, y);
                }
                continue;
            }
            if (nx < 0 || ny < 0 || ny >= field_w_ || (nx >= field_w_ && y != mid)) {
                nx = x;
                ny = y;
            }
            if (nx == field_w_ + bridge_len_) {
                m.next[m.idx(s, a)] = goal;
                m.reward[m.idx(s, a)] = 1.0;
            } else {
                m.next[m.idx(s, a)] = cell_id(nx, ny);
            }
        }
    }
    return m;
}

int CliffBridgeEnv::optimal_path_len() const {
    const int mid = field_w_ / 2;
    return (field_w_ - 1) + mid + bridge_len_ + 1;  // from the fixed (0,0) start
}

std::unique_ptr<Env> make_env(const std::string& name, bool random_start) {
    if (name.rfind("chain", 0) == 0 && name.size() > 5) {
        const int n = std::stoi(name.substr(5));
        return std::make_unique<ChainEnv>(n);
    }
    if (name == "cliff_bridge") return std::make_unique<CliffBridgeEnv>(5, 6, random_start);
    throw std::invalid_argument("unknown env: " + name);
}

}  // namespace sanex
