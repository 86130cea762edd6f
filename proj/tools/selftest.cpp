#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cli.hpp"
#include "iabplace/config.hpp"
#include "iabplace/scenarios.hpp"

namespace iabplace::cli {

namespace {

bool channel_identity() {
    RadioParams p;
    p.delta_exp = 2.0;
    p.eta_los_db = 0.0;
    p.eta_nlos_db = 0.0;
    p.f_a2a_hz = p.f_access_hz;
    Rng rng = make_rng(1, 0);
    for (int i = 0; i < 200; ++i) {
        const double d = uniform_real(rng, 1.0, 2000.0);
        if (std::abs(atg_path_loss_db(d, 0.3, p) - fspl_db(d, p)) > 1e-9) return false;
    }
    double prev = -1.0;
    for (int k = 0; k <= 90; ++k) {
        const double q = los_probability(k * std::numbers::pi / 180.0, p);
        if (!(q > 0.0 && q < 1.0) || q < prev) return false;
        prev = q;
    }
    return true;
}

bool chain_invariants() {
    Rng rng = make_rng(2, 0);
    RadioParams p;
    p.comm_range_m = 150.0;
    const GroundStation bs{{0.0, 0.0, 10.0}};
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 1 + uniform_index(rng, 8);
        std::vector<Uav> uavs;
        for (std::size_t u = 0; u < n; ++u) {
            uavs.push_back({u, {uniform_real(rng, 0.0, 400.0), uniform_real(rng, 0.0, 400.0), 100.0}, true});
        }
        const BackhaulChain c = form_backhaul(bs, uavs, p);
        if (c.snr_evaluations > n * (n + 1)) return false;
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (c.parent[k]) {
                bool earlier = false;
                for (std::size_t j = 0; j < k; ++j) earlier = earlier || c.order[j] == *c.parent[k];
                if (!earlier) return false;
            }
            if (!(c.hop_snr[k] > p.snr_threshold)) return false;
        }
    }
    return true;
}

bool dueling_identity() {
    Rng rng = make_rng(3, 0);
    NetPair nets = make_net_pair({6, 16, 16, 8}, rng);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> obs(6);
        for (double& v : obs) v = uniform_real(rng, -1.0, 1.0);
        const ActionValues q = nets.online.forward(obs);
        double mean = 0.0;
        for (double v : q) mean += v / kActionCount;
        if (std::abs(mean - nets.online.state_value(obs)) > 1e-9) return false;
        const double r = uniform_real(rng, -1.0, 1.0);
        const ActionValues qt = nets.target.forward(obs);
        double best = qt[0];
        for (double v : qt) best = std::max(best, v);
        if (double_q_target(r, obs, false, nets.online, nets.target, 0.9) > r + 0.9 * best + 1e-12) return false;
    }
    return true;
}

bool reward_bounds() {
    ExperimentConfig cfg;
    cfg.n_users = 30;
    const World w = make_world(cfg);
    Rng rng = make_rng(4, 0);
    for (int t = 0; t < 50; ++t) {
        EnvState s = reset(cfg.grid, cfg.n_uavs);
        for (Cell& c : s.cells) {
            c = {static_cast<int>(uniform_index(rng, cfg.grid.nx)), static_cast<int>(uniform_index(rng, cfg.grid.ny))};
        }
        const NetworkSnapshot snap = evaluate_state(s, w, cfg.grid);
        const double r = snapshot_reward(snap, w);
        double lo = snap.user_rates_bps.front();
        double hi = lo;
        for (double v : snap.user_rates_bps) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (r < lo * w.reward_scale - 1e-9 || r > hi * w.reward_scale + 1e-9) return false;
    }
    return true;
}

bool config_round_trip() {
    ExperimentConfig cfg;
    cfg.n_uavs = 3;
    cfg.radio.comm_range_m = 123.5;
    const ExperimentConfig back = parse_config_text(render_config(cfg), {});
    return config_hash(back) == config_hash(cfg) && render_config(back) == render_config(cfg);
}

}  // namespace

int run_selftest() {
    const std::vector<std::pair<std::string, std::function<bool()>>> checks = {
        {"path loss identity and LoS monotonicity", channel_identity},
        {"backhaul chain invariants", chain_invariants},
        {"dueling combine and double-Q target bound", dueling_identity},
        {"reward lies within user rate range", reward_bounds},
        {"config render/parse round trip", config_round_trip},
    };
    int failures = 0;
    for (const auto& [name, check] : checks) {
        bool ok = false;
        try {
            ok = check();
        } catch (const std::exception& e) {
            std::printf("  exception: %s\n", e.what());
        }
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
        failures += ok ? 0 : 1;
    }
    return failures;
}

}  // namespace iabplace::cli
