#include <doctest.h>

#include <cmath>
#include <deque>
#include <stdexcept>

#include "sanex/agent.hpp"
#include "sanex/io.hpp"

using namespace sanex;

namespace {

Transition make_t(double tag) {
    Transition t;
    t.s = Mat::column({tag});
    t.s_next = Mat::column({tag + 0.5});
    t.a = 0;
    t.r = tag;
    return t;
}

}  // namespace

TEST_CASE("replay buffer evicts oldest") {
    ReplayBuffer buf(2);
    buf.push(make_t(1));
    buf.push(make_t(2));
    buf.push(make_t(3));
    CHECK(buf.size() == 2);
    CHECK(buf.at(0).r == 2.0);
    CHECK(buf.at(1).r == 3.0);
    CHECK_THROWS_AS(buf.at(2), std::out_of_range);
}

TEST_CASE("replay buffer agrees with a deque model over many pushes") {
    ReplayBuffer buf(1000);
    std::deque<double> model;
    Rng rng(6);
    for (int i = 0; i < 10000; ++i) {
        double tag = rng.uniform();
        buf.push(make_t(tag));
        model.push_back(tag);
        if (model.size() > 1000) model.pop_front();
    }
    REQUIRE(buf.size() == model.size());
    for (std::size_t i = 0; i < model.size(); i += 37) CHECK(buf.at(i).r == model[i]);
}

TEST_CASE("sample_batch is uniform with replacement") {
    ReplayBuffer buf(3);
    for (int i = 0; i < 3; ++i) buf.push(make_t(i));
    Rng rng(9);
    const int n = 30000;
    std::vector<int> counts(3, 0);
    bool repeat_seen = false;
    for (int i = 0; i < n / 3; ++i) {
        auto batch = buf.sample_batch(rng, 3);
        for (const Transition* t : batch) ++counts[static_cast<int>(t->r)];
        repeat_seen = repeat_seen || batch[0]->r == batch[1]->r || batch[1]->r == batch[2]->r ||
                      batch[0]->r == batch[2]->r;
    }
    const double p = 1.0 / 3.0;
    for (int c : counts) CHECK(std::abs(c - n * p) < 3 * std::sqrt(n * p * (1 - p)));
    CHECK(repeat_seen);  // with replacement, collisions must occur

    ReplayBuffer small(8);
    small.push(make_t(0));
    CHECK_THROWS_AS(small.sample_batch(rng, 2), std::runtime_error);
}

TEST_CASE("td target trivials") {
    Rng init(1);
    QNetworkParams target = make_qnet(Strategy::plain, 1, {}, {}, 2, 4, init);
    Rng rng(2);
    Transition t = make_t(0.25);
    t.done = true;
    CHECK(td_target(t, target, rng, 0.99) == 0.25);

    // non-terminal: r + gamma * max_a Q(s')
    t.done = false;
    Mat q = q_forward(target, t.s_next, nullptr, QMode::clean).q;
    double want = 0.25 + 0.5 * std::max(q.data[0], q.data[1]);
    CHECK(td_target(t, target, rng, 0.5) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("batch loss at a fixed point is zero and gradient pushes toward target") {
    // One-parameter net: Q(s) = w*s, single action.
    Rng init(3);
    QNetworkParams qp = make_qnet(Strategy::plain, 1, {}, {}, 1, 4, init);
    QNetworkParams tp = qp;
    qp.head[0].W(0, 0) = 1.0;
    qp.head[0].b(0, 0) = 0.0;

    Transition t;
    t.s = Mat::column({2.0});
    t.s_next = Mat::column({0.0});
    t.a = 0;
    t.done = true;
    t.r = 2.0;  // Q(s) = 2 = r: zero TD error
    std::vector<const Transition*> batch{&t};
    Rng rng(4);
    qp.zero_grad();
    double loss = batch_loss_and_grads(qp, tp, batch, rng, 0.99);
    CHECK(loss == 0.0);
    CHECK(qp.head[0].gradW(0, 0) == 0.0);

    t.r = 4.0;  // error = Q - y = -2, loss = 4, dloss/dw = 2*err*s = -8
    qp.zero_grad();
    loss = batch_loss_and_grads(qp, tp, batch, rng, 0.99);
    CHECK(loss == 4.0);
    CHECK(qp.head[0].gradW(0, 0) == -8.0);
}

TEST_CASE("select_action epsilon=1 is uniform; sigma-zeroed SANE matches clean greedy") {
    Rng init(5);
    QNetworkParams qp = make_qnet(Strategy::epsilon_greedy, 2, {}, {}, 3, 4, init);
    Mat s = Mat::column({0.3, -0.3});
    Rng rng_noise(1), rng_action(2);
    const int n = 30000;
    std::vector<int> counts(3, 0);
    for (int i = 0; i < n; ++i) ++counts[select_action(qp, s, rng_noise, rng_action, 1.0)];
    const double p = 1.0 / 3.0;
    for (int c : counts) CHECK(std::abs(c - n * p) < 3 * std::sqrt(n * p * (1 - p)));

    // epsilon=0 always picks the clean argmax
    int greedy = argmax(q_forward(qp, s, nullptr, QMode::clean).q);
    for (int i = 0; i < 100; ++i) CHECK(select_action(qp, s, rng_noise, rng_action, 0.0) == greedy);

    // SANE net with plain init (zero noise params) acts exactly greedily
    Rng init2(5);
    QNetworkParams sane = make_qnet(Strategy::simple_sane, 2, {}, {}, 3, 4, init2, true);
    int sane_greedy = argmax(q_forward(sane, s, nullptr, QMode::clean).q);
    for (int i = 0; i < 100; ++i)
        CHECK(select_action(sane, s, rng_noise, rng_action, 0.0) == sane_greedy);
}

TEST_CASE("target_sync deep-copies all parameters") {
    Rng init(7);
    QNetworkParams qp = make_qnet(Strategy::q_sane, 3, {4}, {}, 2, 4, init);
    QNetworkParams tp = target_sync(qp);
    CHECK(flatten_params(qp) == flatten_params(tp));
    // mutating the copy leaves the original untouched
    tp.head[0].W(0, 0) += 1.0;
    CHECK(flatten_params(qp) != flatten_params(tp));
    // idempotent
    QNetworkParams tp2 = target_sync(qp);
    CHECK(flatten_params(tp2) == flatten_params(qp));
}

TEST_CASE("epsilon schedule is linear then flat") {
    TrainConfig cfg;
    cfg.epsilon_start = 1.0;
    cfg.epsilon_end = 0.1;
    cfg.epsilon_anneal_steps = 100;
    cfg.max_steps = 1000;
    CHECK(epsilon_at(cfg, 0) == 1.0);
    CHECK(epsilon_at(cfg, 50) == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(epsilon_at(cfg, 100) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(epsilon_at(cfg, 500) == doctest::Approx(0.1).epsilon(1e-12));
}

namespace {

TrainConfig tiny_cfg(const std::string& strategy, std::int64_t steps) {
    TrainConfig cfg;
    cfg.env = "chain3";
    cfg.strategy = strategy;
    cfg.max_steps = steps;
    cfg.warmup_transitions = 32;
    cfg.buffer_capacity = 256;
    cfg.batch_size = 8;
    cfg.update_frequency = 2;
    cfg.copy_frequency = 50;
    cfg.encoder_hidden = 0;
    cfg.head_hidden = 6;
    cfg.sane_hidden = 6;
    cfg.seed = 12;
    return cfg;
}

}  // namespace

TEST_CASE("train_loop with zero steps does nothing") {
    TrainConfig cfg = tiny_cfg("epsilon_greedy", 0);
    TrainResult r = train_loop(cfg);
    CHECK(r.updates == 0);
    CHECK(r.state.step == 0);
    CHECK(r.metrics.empty());
}

TEST_CASE("train_loop is deterministic for a fixed seed") {
    TrainConfig cfg = tiny_cfg("simple_sane", 400);
    TrainResult a = train_loop(cfg);
    TrainResult b = train_loop(cfg);
    CHECK(flatten_params(a.state.params) == flatten_params(b.state.params));
    REQUIRE(a.metrics.size() == b.metrics.size());
    for (std::size_t i = 0; i < a.metrics.size(); ++i) {
        CHECK(a.metrics[i].step == b.metrics[i].step);
        CHECK(a.metrics[i].loss == b.metrics[i].loss);
        CHECK(a.metrics[i].kl_term == b.metrics[i].kl_term);
    }
    cfg.seed = 13;
    TrainResult c = train_loop(cfg);
    CHECK(flatten_params(a.state.params) != flatten_params(c.state.params));
}

TEST_CASE("train_loop update count and target staleness") {
    TrainConfig cfg = tiny_cfg("epsilon_greedy", 300);
    TrainResult r = train_loop(cfg);
    // updates happen every update_frequency steps once past warmup
    CHECK(r.updates == (cfg.max_steps - cfg.warmup_transitions) / cfg.update_frequency);
    CHECK(r.state.step == cfg.max_steps);
    // the target lags by at most copy_frequency updates of drift, and on a
    // copy boundary both nets share the last synced values; just check the
    // target holds finite params of the right size
    CHECK(flatten_params(r.state.target).size() == flatten_params(r.state.params).size());
    for (const MetricsRow& m : r.metrics) {
        CHECK(m.loss >= 0.0);
        CHECK(m.wallclock_ms == 0.0);
    }
}

TEST_CASE("train_loop clips rewards to [-1, 1] for learning but reports raw returns") {
    // chain rewards are already in range; just confirm flag round-trips the
    // config and training accepts it
    TrainConfig cfg = tiny_cfg("epsilon_greedy", 100);
    cfg.clip_rewards = false;
    TrainConfig parsed = parse_config_text(config_to_text(cfg));
    CHECK(parsed.clip_rewards == false);
    CHECK_NOTHROW(train_loop(cfg));
}

TEST_CASE("evaluate on a solved chain returns 1 with zero spread") {
    // Hand-build a net that always prefers right: Q = [0, 1] constant.
    Rng init(15);
    QNetworkParams qp = make_qnet(Strategy::plain, 4, {}, {}, 2, 4, init, true);
    qp.head[0].W.fill(0.0);
    qp.head[0].b(0, 0) = 0.0;
    qp.head[0].b(1, 0) = 1.0;
    ChainEnv env(4);
    Rng rng(3);
    EvalResult r = evaluate(qp, env, 5, rng, false, 0);
    CHECK(r.mean == 1.0);
    CHECK(r.stddev == 0.0);
    REQUIRE(r.returns.size() == 5);
}

TEST_CASE("evaluate with a always-left policy times out with zero return") {
    Rng init(16);
    QNetworkParams qp = make_qnet(Strategy::plain, 4, {}, {}, 2, 4, init, true);
    qp.head[0].W.fill(0.0);
    qp.head[0].b(0, 0) = 1.0;  // prefer left forever
    ChainEnv env(4);
    Rng rng(3);
    EvalResult r = evaluate(qp, env, 3, rng, false, 50);
    CHECK(r.mean == 0.0);
}

TEST_CASE("config validation rejects nonsense") {
    TrainConfig cfg = tiny_cfg("epsilon_greedy", 100);
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_cfg("epsilon_greedy", 100);
    cfg.warmup_transitions = 4;  // smaller than batch_size
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_cfg("nope", 100);
    CHECK_THROWS(train_loop(cfg));
}
