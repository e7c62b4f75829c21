#include "sanex/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sanex {

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("fmt_double: conversion failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("parse_double: bad value: " + s);
    return v;
}

void write_metrics(const std::vector<MetricsRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_metrics: cannot open " + path);
    out << "step,episode,episode_return,loss,mean_abs_sigma,kl_term,wallclock_ms\n";
    for (const MetricsRow& r : rows) {
        out << r.step << ',' << r.episode << ',' << fmt_double(r.episode_return) << ','
            << fmt_double(r.loss) << ',' << fmt_double(r.mean_abs_sigma) << ','
            << fmt_double(r.kl_term) << ',' << fmt_double(r.wallclock_ms) << '\n';
    }
    if (!out) throw std::runtime_error("write_metrics: write failed for " + path);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::runtime_error("config: bad boolean: " + v);
}

}  // namespace

TrainConfig parse_config_text(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "env") cfg.env = val;
        else if (key == "strategy") cfg.strategy = val;
        else if (key == "gamma") cfg.gamma = parse_double(val);
        else if (key == "lr") cfg.lr = parse_double(val);
        else if (key == "adam_eps") cfg.adam_eps = parse_double(val);
        else if (key == "batch_size") cfg.batch_size = std::stoi(val);
        else if (key == "update_frequency") cfg.update_frequency = std::stoi(val);
        else if (key == "copy_frequency") cfg.copy_frequency = std::stoi(val);
        else if (key == "buffer_capacity") cfg.buffer_capacity = std::stoi(val);
        else if (key == "warmup_transitions") cfg.warmup_transitions = std::stoi(val);
        else if (key == "max_steps") cfg.max_steps = std::stoll(val);
        else if (key == "max_episode_steps") cfg.max_episode_steps = std::stoi(val);
        else if (key == "epsilon_start") cfg.epsilon_start = parse_double(val);
        else if (key == "epsilon_end") cfg.epsilon_end = parse_double(val);
        else if (key == "epsilon_anneal_steps") cfg.epsilon_anneal_steps = std::stoll(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "eval_episodes") cfg.eval_episodes = std::stoi(val);
        else if (key == "eval_noise") cfg.eval_noise = parse_bool(val);
        else if (key == "clip_rewards") cfg.clip_rewards = parse_bool(val);
        else if (key == "sane_hidden") cfg.sane_hidden = std::stoi(val);
        else if (key == "encoder_hidden") cfg.encoder_hidden = std::stoi(val);
        else if (key == "head_hidden") cfg.head_hidden = std::stoi(val);
        else if (key == "force_zero_noise") cfg.force_zero_noise = parse_bool(val);
        else if (key == "perturb_with_next_state") cfg.perturb_with_next_state = parse_bool(val);
        else if (key == "random_start") cfg.random_start = parse_bool(val);
        else if (key == "metrics_wallclock") cfg.metrics_wallclock = parse_bool(val);
        else if (key == "metrics_update_interval") cfg.metrics_update_interval = std::stoi(val);
        else throw std::runtime_error("config line " + std::to_string(lineno) + ": unknown key " + key);
    }
    return cfg;
}

TrainConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_to_text(const TrainConfig& cfg) {
    std::ostringstream out;
    auto b = [](bool v) { return v ? "true" : "false"; };
    out << "env = " << cfg.env << '\n'
        << "strategy = " << cfg.strategy << '\n'
        << "gamma = " << fmt_double(cfg.gamma) << '\n'
        << "lr = " << fmt_double(cfg.lr) << '\n'
        << "adam_eps = " << fmt_double(cfg.adam_eps) << '\n'
        << "batch_size = " << cfg.batch_size << '\n'
        << "update_frequency = " << cfg.update_frequency << '\n'
        << "copy_frequency = " << cfg.copy_frequency << '\n'
        << "buffer_capacity = " << cfg.buffer_capacity << '\n'
        << "warmup_transitions = " << cfg.warmup_transitions << '\n'
        << "max_steps = " << cfg.max_steps << '\n'
        << "max_episode_steps = " << cfg.max_episode_steps << '\n'
        << "epsilon_start = " << fmt_double(cfg.epsilon_start) << '\n'
        << "epsilon_end = " << fmt_double(cfg.epsilon_end) << '\n'
        << "epsilon_anneal_steps = " << cfg.epsilon_anneal_steps << '\n'
        << "seed = " << cfg.seed << '\n'
        << "eval_episodes = " << cfg.eval_episodes << '\n'
        << "eval_noise = " << b(cfg.eval_noise) << '\n'
        << "clip_rewards = " << b(cfg.clip_rewards) << '\n'
        << "sane_hidden = " << cfg.sane_hidden << '\n'
        << "encoder_hidden = " << cfg.encoder_hidden << '\n'
        << "head_hidden = " << cfg.head_hidden << '\n'
        << "force_zero_noise = " << b(cfg.force_zero_noise) << '\n'
        << "perturb_with_next_state = " << b(cfg.perturb_with_next_state) << '\n'
        << "random_start = " << b(cfg.random_start) << '\n'
        << "metrics_wallclock = " << b(cfg.metrics_wallclock) << '\n'
        << "metrics_update_interval = " << cfg.metrics_update_interval << '\n';
    return out.str();
}

namespace {

void write_array(std::ostream& out, const std::string& name, const std::vector<double>& v) {
    out << "array " << name << ' ' << v.size() << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << fmt_double(v[i]);
    out << '\n';
}

void write_mat_array(std::ostream& out, const std::string& name, const Mat& m) {
    out << "array " << name << ' ' << m.size() << '\n';
    for (std::size_t i = 0; i < m.data.size(); ++i) out << (i ? " " : "") << fmt_double(m.data[i]);
    out << '\n';
}

void write_rng(std::ostream& out, const std::string& name, const Rng::State& st) {
    out << "rng " << name;
    for (auto w : st.s) out << ' ' << w;
    out << ' ' << (st.has_spare ? 1 : 0) << ' ' << fmt_double(st.spare) << '\n';
}

class CheckpointReader {
public:
    explicit CheckpointReader(std::istream& in) : in_(in) {}

    std::string expect_line() {
        std::string line;
        if (!std::getline(in_, line)) throw std::runtime_error("checkpoint: unexpected end of file");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    std::vector<double> read_array(const std::string& name, std::size_t expect_n) {
        std::istringstream hdr(expect_line());
        std::string tag, got;
        std::size_t n = 0;
        hdr >> tag >> got >> n;
        if (tag != "array" || got != name)
            throw std::runtime_error("checkpoint: expected array " + name + ", got " + got);
        if (n != expect_n)
            throw std::runtime_error("checkpoint: array " + name + " size mismatch");
        std::istringstream vals(expect_line());
        std::vector<double> out(n);
        std::string tok;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(vals >> tok)) throw std::runtime_error("checkpoint: truncated array " + name);
            out[i] = parse_double(tok);
        }
        return out;
    }

    Rng::State read_rng(const std::string& name) {
        std::istringstream ss(expect_line());
        std::string tag, got;
        ss >> tag >> got;
        if (tag != "rng" || got != name)
            throw std::runtime_error("checkpoint: expected rng " + name);
        Rng::State st{};
        int spare_flag = 0;
        std::string spare_tok;
        for (auto& w : st.s) ss >> w;
        ss >> spare_flag >> spare_tok;
        if (!ss) throw std::runtime_error("checkpoint: malformed rng " + name);
        st.has_spare = spare_flag != 0;
        st.spare = parse_double(spare_tok);
        return st;
    }

private:
    std::istream& in_;
};

template <typename MatFn>
void visit_named_mats(QNetworkParams& p, MatFn&& fn) {
    for (std::size_t i = 0; i < p.encoder.size(); ++i) {
        fn("encoder." + std::to_string(i) + ".W", p.encoder[i].W);
        fn("encoder." + std::to_string(i) + ".b", p.encoder[i].b);
    }
    for (std::size_t i = 0; i < p.head.size(); ++i) {
        fn("head." + std::to_string(i) + ".W", p.head[i].W);
        fn("head." + std::to_string(i) + ".b", p.head[i].b);
    }
    for (std::size_t i = 0; i < p.sigma_W.size(); ++i) {
        fn("sigma_W." + std::to_string(i), p.sigma_W[i]);
        fn("sigma_b." + std::to_string(i), p.sigma_b[i]);
    }
    if (!p.sane.empty()) {
        fn("sane.hidden.W", p.sane.hidden.W);
        fn("sane.hidden.b", p.sane.hidden.b);
        fn("sane.out.W", p.sane.out.W);
        fn("sane.out.b", p.sane.out.b);
    }
}

}  // namespace

void save_checkpoint(const TrainState& state, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out << kCheckpointMagic << '\n';
    out << "strategy " << strategy_to_string(state.params.strategy) << '\n';
    out << "step " << state.step << '\n';
    out << "config_begin\n" << config_to_text(state.cfg) << "config_end\n";
    write_rng(out, "env", state.rng_env);
    write_rng(out, "noise", state.rng_noise);
    write_rng(out, "batch", state.rng_batch);
    out << "adam " << state.adam.t << ' ' << fmt_double(state.adam.alpha) << ' '
        << fmt_double(state.adam.beta1) << ' ' << fmt_double(state.adam.beta2) << ' '
        << fmt_double(state.adam.eps) << '\n';
    write_array(out, "adam.m", state.adam.m);
    write_array(out, "adam.v", state.adam.v);
    QNetworkParams& params = const_cast<QNetworkParams&>(state.params);
    visit_named_mats(params, [&](const std::string& name, Mat& m) { write_mat_array(out, name, m); });
    const QNetworkParams& tgt = state.target;
    visit_named_mats(const_cast<QNetworkParams&>(tgt),
                     [&](const std::string& name, Mat& m) { write_mat_array(out, "target." + name, m); });
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

TrainState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    CheckpointReader r(in);
    if (r.expect_line() != kCheckpointMagic)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    TrainState state;
    {
        std::istringstream ss(r.expect_line());
        std::string tag, strat;
        ss >> tag >> strat;
        if (tag != "strategy") throw std::runtime_error("checkpoint: missing strategy");
        strategy_from_string(strat);  // validated; the rebuild uses the config echo
    }
    {
        std::istringstream ss(r.expect_line());
        std::string tag;
        ss >> tag >> state.step;
        if (tag != "step") throw std::runtime_error("checkpoint: missing step");
    }
    if (r.expect_line() != "config_begin") throw std::runtime_error("checkpoint: missing config");
    std::string cfg_text;
    for (std::string line = r.expect_line(); line != "config_end"; line = r.expect_line())
        cfg_text += line + "\n";
    state.cfg = parse_config_text(cfg_text);
    state.rng_env = r.read_rng("env");
    state.rng_noise = r.read_rng("noise");
    state.rng_batch = r.read_rng("batch");

    auto env = make_env(state.cfg.env, state.cfg.random_start);
    Rng dummy(0);
    state.params = build_network(state.cfg, env->spec(), dummy);
    state.target = state.params;

    {
        std::istringstream ss(r.expect_line());
        std::string tag, a, b1, b2, e;
        ss >> tag >> state.adam.t >> a >> b1 >> b2 >> e;
        if (tag != "adam" || !ss) throw std::runtime_error("checkpoint: malformed adam line");
        state.adam.alpha = parse_double(a);
        state.adam.beta1 = parse_double(b1);
        state.adam.beta2 = parse_double(b2);
        state.adam.eps = parse_double(e);
    }
    const std::size_t n = param_count(state.params);
    state.adam.m = r.read_array("adam.m", n);
    state.adam.v = r.read_array("adam.v", n);
    visit_named_mats(state.params, [&](const std::string& name, Mat& m) {
        auto vals = r.read_array(name, m.size());
        m.data = std::move(vals);
    });
    visit_named_mats(state.target, [&](const std::string& name, Mat& m) {
        auto vals = r.read_array("target." + name, m.size());
        m.data = std::move(vals);
    });
    return state;
}

}  // namespace sanex
