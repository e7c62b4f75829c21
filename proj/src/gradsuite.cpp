#include "sanex/gradsuite.hpp"

#include <cmath>

#include "sanex/agent.hpp"
#include "sanex/gradcheck.hpp"

namespace sanex {

namespace {

Mat random_obs(Rng& rng, int width) {
    Mat s(width, 1);
    for (double& v : s.data) v = rng.uniform(-1.0, 1.0);
    return s;
}

}  // namespace

GradSuiteReport run_gradient_suite(Strategy strategy, int n_nets, std::uint64_t seed, double rel_tol,
                                   double abs_floor, double h, bool perturb_with_next_state) {
    GradSuiteReport report;
    Rng meta(seed);
    for (int net = 0; net < n_nets; ++net) {
        const int obs_w = 2 + meta.uniform_int(3);
        const int n_actions = 2 + meta.uniform_int(2);
        std::vector<int> enc;
        if (meta.uniform_int(2)) enc.push_back(3 + meta.uniform_int(3));
        std::vector<int> head_hidden;
        if (meta.uniform_int(2)) head_hidden.push_back(3 + meta.uniform_int(3));
        const int sane_hidden = 3 + meta.uniform_int(3);

        Rng init(meta.next_u64());
        QNetworkParams qnet =
            make_qnet(strategy, obs_w, enc, head_hidden, n_actions, sane_hidden, init);
        QNetworkParams target =
            make_qnet(strategy, obs_w, enc, head_hidden, n_actions, sane_hidden, init);
        // Jitter every parameter (biases start at exactly 0) so no ReLU
        // pre-activation sits exactly on its kink, where central differences
        // disagree with any one-sided subgradient.
        {
            std::vector<double> flat = flatten_params(qnet);
            for (double& v : flat) v += init.uniform(-0.05, 0.05);
            set_params_from_flat(qnet, flat);
        }

        const int batch_n = 1 + meta.uniform_int(3);
        std::vector<Transition> storage;
        for (int i = 0; i < batch_n; ++i) {
            Transition t;
            t.s = random_obs(meta, obs_w);
            t.s_next = random_obs(meta, obs_w);
            t.a = meta.uniform_int(n_actions);
            t.r = meta.uniform(-1.0, 1.0);
            t.done = meta.uniform_int(4) == 0;
            storage.push_back(std::move(t));
        }
        std::vector<const Transition*> batch;
        for (const Transition& t : storage) batch.push_back(&t);

        const double gamma = 0.9;
        const std::uint64_t noise_seed = meta.next_u64();

        qnet.zero_grad();
        {
            Rng noise(noise_seed);
            batch_loss_and_grads(qnet, target, batch, noise, gamma, perturb_with_next_state);
        }
        const std::vector<double> analytic = flatten_grads(qnet);

        QNetworkParams probe = qnet;
        auto f = [&](const std::vector<double>& flat) {
            set_params_from_flat(probe, flat);
            probe.zero_grad();
            Rng noise(noise_seed);
            return batch_loss_and_grads(probe, target, batch, noise, gamma, perturb_with_next_state);
        };
        const std::vector<double> numeric = finite_diff_grad(f, flatten_params(qnet), h);

        const double err = max_relative_error(analytic, numeric, abs_floor);
        report.worst_rel_err = std::max(report.worst_rel_err, err);
        ++report.nets;
        if (err > rel_tol) {
            report.pass = false;
            report.failures.push_back("net " + std::to_string(net) + ": rel err " + std::to_string(err));
        }
    }
    return report;
}

}  // namespace sanex
