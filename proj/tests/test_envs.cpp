#include <doctest.h>

#include <set>

#include <cmath>
#include <stdexcept>

#include "sanex/envs.hpp"

using namespace sanex;

TEST_CASE("chain n=2: one step right ends the episode with reward 1") {
    ChainEnv env(2);
    Rng rng(1);
    env.reset(rng);
    CHECK(env.state_id() == 0);
    StepResult r = env.step(1);
    CHECK(r.reward == 1.0);
    CHECK(r.done);
    CHECK_THROWS_AS(env.step(0), std::logic_error);
}

TEST_CASE("chain observations are one-hot") {
    ChainEnv env(5);
    for (int s = 0; s < 5; ++s) {
        Mat obs = env.observe(s);
        REQUIRE(obs.rows == 5);
        for (int i = 0; i < 5; ++i) CHECK(obs(i, 0) == (i == s ? 1.0 : 0.0));
    }
}

TEST_CASE("chain value iteration matches the closed form") {
    // Optimal: always right; from state s the terminal is reached after
    // n-1-s moves, so Q*(s, right) = gamma^(n-2-s).
    for (int n : {2, 5, 8}) {
        ChainEnv env(n);
        Mat q = value_iteration(env.mdp(), 0.99, 1e-10);
        for (int s = 0; s < n - 1; ++s) {
            CHECK(q(s, 1) == doctest::Approx(std::pow(0.99, n - 2 - s)).epsilon(1e-8));
            // left stalls (or steps back), so it is never better
            CHECK(q(s, 0) < q(s, 1));
        }
        // terminal state has zero value
        CHECK(q(n - 1, 0) == 0.0);
        CHECK(q(n - 1, 1) == 0.0);
        std::vector<int> pi = greedy_policy(q);
        for (int s = 0; s < n - 1; ++s) CHECK(pi[s] == 1);
    }
}

TEST_CASE("value iteration rejects gamma >= 1") {
    ChainEnv env(3);
    CHECK_THROWS_AS(value_iteration(env.mdp(), 1.0, 1e-8), std::invalid_argument);
}

TEST_CASE("value iteration on a two-state hand MDP") {
    // s0 -a0-> s1 (r=1, terminal), s0 -a1-> s0 (r=0): Q(s0,a0)=1, Q(s0,a1)=gamma*1
    TabularMdp mdp;
    mdp.n_states = 2;
    mdp.n_actions = 2;
    mdp.next = {1, 0, 1, 1};
    mdp.reward = {1, 0, 0, 0};
    mdp.terminal = {0, 1};
    Mat q = value_iteration(mdp, 0.5, 1e-12);
    CHECK(q(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(q(0, 1) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("cliff bridge geometry and transitions") {
    CliffBridgeEnv env(5, 6, false);
    const TabularMdp& mdp = env.mdp();
    // field 25 cells + bridge 6 + two absorbing states
    CHECK(env.n_cells() == 31);
    CHECK(mdp.n_states == 33);

    // only bridge cells are high risk
    int high = 0;
    for (int c = 0; c < env.n_cells(); ++c) high += env.high_risk(c) ? 1 : 0;
    CHECK(high == 6);

    // rewards stay within [-1, 1]
    for (double r : mdp.reward) CHECK(std::abs(r) <= 1.0);

    // any off-bridge move from a bridge cell crashes with -1
    for (int c = 0; c < env.n_cells(); ++c) {
        if (!env.high_risk(c)) continue;
        CHECK(mdp.reward[mdp.idx(c, 0)] == -1.0);  // up
        CHECK(mdp.reward[mdp.idx(c, 1)] == -1.0);  // down
        CHECK(mdp.terminal[mdp.next[mdp.idx(c, 0)]] == 1);
    }
}

TEST_CASE("cliff bridge optimal policy crosses the bridge") {
    CliffBridgeEnv env(5, 6, false);
    Mat q = value_iteration(env.mdp(), 0.99, 1e-10);
    std::vector<int> pi = greedy_policy(q);
    // roll the greedy policy from the start; it must reach the goal with +1
    Rng rng(1);
    env.reset(rng);
    double ret = 0;
    bool done = false;
    bool crossed_bridge = false;
    int steps = 0;
    while (!done && steps < 200) {
        if (env.high_risk(env.state_id())) crossed_bridge = true;
        StepResult r = env.step(pi[env.state_id()]);
        ret += r.reward;
        done = r.done;
        ++steps;
    }
    CHECK(done);
    CHECK(ret == 1.0);
    CHECK(crossed_bridge);
    CHECK(steps == env.optimal_path_len());
}

TEST_CASE("cliff bridge bellman residual of the VI solution is tiny") {
    CliffBridgeEnv env(5, 6, false);
    const TabularMdp& mdp = env.mdp();
    const double gamma = 0.99;
    Mat q = value_iteration(mdp, gamma, 1e-12);
    double worst = 0;
    for (int s = 0; s < mdp.n_states; ++s) {
        if (mdp.terminal[s]) continue;
        for (int a = 0; a < mdp.n_actions; ++a) {
            int sn = mdp.next[mdp.idx(s, a)];
            double vmax = 0;
            if (!mdp.terminal[sn])
                for (int an = 0; an < mdp.n_actions; ++an) vmax = std::max(vmax, q(sn, an));
            worst = std::max(worst, std::abs(q(s, a) - (mdp.reward[mdp.idx(s, a)] + gamma * vmax)));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("cliff bridge observations carry position and region flag") {
    CliffBridgeEnv env(5, 6, false);
    for (int c = 0; c < env.n_cells(); ++c) {
        Mat obs = env.observe(c);
        REQUIRE(obs.rows == 4);
        CHECK(obs(0, 0) >= 0.0);
        CHECK(obs(0, 0) <= 1.0);
        CHECK(obs(1, 0) >= 0.0);
        CHECK(obs(1, 0) <= 1.0);
        // exactly one region flag set
        CHECK(obs(2, 0) + obs(3, 0) == 1.0);
        CHECK(obs(3, 0) == (env.high_risk(c) ? 1.0 : 0.0));
    }
}

TEST_CASE("crash on the bridge yields -1 when stepping live") {
    CliffBridgeEnv env(5, 6, false);
    Mat q = value_iteration(env.mdp(), 0.99, 1e-10);
    std::vector<int> pi = greedy_policy(q);
    Rng rng(2);
    env.reset(rng);
    // walk optimally until the first bridge cell, then step off
    int steps = 0;
    while (!env.high_risk(env.state_id()) && steps < 100) {
        env.step(pi[env.state_id()]);
        ++steps;
    }
    REQUIRE(env.high_risk(env.state_id()));
    StepResult r = env.step(0);  // up, off the bridge
    CHECK(r.reward == -1.0);
    CHECK(r.done);
}

TEST_CASE("make_env parses names") {
    auto chain = make_env("chain7");
    CHECK(chain->spec().obs_width == 7);
    CHECK(chain->spec().n_actions == 2);
    auto cliff = make_env("cliff_bridge");
    CHECK(cliff->spec().obs_width == 4);
    CHECK(cliff->spec().n_actions == 4);
    CHECK_THROWS_AS(make_env("pong"), std::invalid_argument);
}

TEST_CASE("random start covers field and bridge cells") {
    CliffBridgeEnv env(5, 6, true);
    Rng rng(4);
    bool field_seen = false, bridge_seen = false;
    std::set<int> starts;
    for (int i = 0; i < 500; ++i) {
        env.reset(rng);
        const int id = env.state_id();
        CHECK(id >= 0);
        CHECK(id < env.n_cells());
        starts.insert(id);
        (env.high_risk(id) ? bridge_seen : field_seen) = true;
    }
    CHECK(field_seen);
    CHECK(bridge_seen);
    // 500 uniform draws over 31 cells should hit every cell
    CHECK(starts.size() == static_cast<std::size_t>(env.n_cells()));
}
