#include <cmath>
#include <set>

#include "doctest.h"
#include "iabplace/config.hpp"
#include "iabplace/errors.hpp"
#include "iabplace/record_io.hpp"
#include "iabplace/scenarios.hpp"

using namespace iabplace;

namespace {

ExperimentConfig tiny() {
    return parse_config_text(
        "grid_nx: 4\ngrid_ny: 4\ncell_size_m: 30\naltitude_m: 30\nn_uavs: 1\nn_users: 20\n"
        "user_mean: [60, 60]\nuser_cov: [[100, 0], [0, 100]]\nbs_position: [0, 0, 10]\n"
        "episodes: 5\niterations: 10\nseed: 3\n");
}

}  // namespace

TEST_CASE("user sampling") {
    GridSpec g{100, 100, 10.0, 50.0};
    UserDistribution d;
    d.mean = {300, 400};
    d.cov = {{{0, 0}, {0, 0}}};
    Rng rng = make_rng(1, 1);
    for (const auto& u : sample_users(d, 50, g, rng)) CHECK(u.pos == Position{300, 400, 0});

    d.cov = {{{400, 0}, {0, 100}}};
    Rng r2 = make_rng(2, 1);
    const auto users = sample_users(d, 10000, g, r2);
    double mx = 0, my = 0;
    for (const auto& u : users) {
        mx += u.pos.x / users.size();
        my += u.pos.y / users.size();
    }
    CHECK(std::abs(mx - 300) < 3 * 20.0 / 100.0);
    CHECK(std::abs(my - 400) < 3 * 10.0 / 100.0);

    Rng r3 = make_rng(2, 1);
    const auto again = sample_users(d, 10000, g, r3);
    for (std::size_t m = 0; m < users.size(); ++m) CHECK(again[m].pos == users[m].pos);

    d.cov = {{{1, 2}, {2, 1}}};
    CHECK_THROWS_AS(d.validate(), ConfigError);
}

TEST_CASE("users are clamped into the grid") {
    GridSpec g{4, 4, 10.0, 50.0};
    UserDistribution d;
    d.mean = {1000, -1000};
    Rng rng = make_rng(1, 1);
    for (const auto& u : sample_users(d, 20, g, rng)) {
        CHECK(u.pos.x == g.x_max());
        CHECK(u.pos.y == 0.0);
    }
}

TEST_CASE("zero episodes") {
    auto cfg = tiny();
    cfg.episodes = 0;
    const auto res = run_training(cfg);
    CHECK(res.record.episodes.empty());
    REQUIRE(res.record.trajectories.size() == 1);
    CHECK(res.record.trajectories[0].size() == 1);
    CHECK(res.record.final_cells == std::vector<Cell>{{0, 0}});
}

TEST_CASE("training is reproducible") {
    const auto cfg = tiny();
    const auto a = run_training(cfg).record;
    const auto b = run_training(cfg).record;
    CHECK(metrics_csv(a) == metrics_csv(b));
    CHECK(trajectory_csv(a) == trajectory_csv(b));
    CHECK(a.episodes.size() == 5);
}

TEST_CASE("frozen greedy policy walks a fixed path") {
    auto cfg = tiny();
    cfg.schedule = {0.0, 0.0, 0.01, 0.0};
    cfg.train.mu = 1e-9;
    const auto rec = run_training(cfg).record;
    for (const auto& e : rec.episodes) CHECK(e.reward == doctest::Approx(rec.episodes[0].reward).epsilon(1e-6));
}

TEST_CASE("brute force is exhaustive") {
    const auto cfg = tiny();
    const World w = make_world(cfg);
    double best = -1.0;
    for (int x = 0; x < 4; ++x) {
        for (int y = 0; y < 4; ++y) {
            const std::vector<Cell> c{{x, y}};
            best = std::max(best, placement_reward(c, w, cfg.grid));
        }
    }
    const auto p = brute_force_placement(cfg);
    CHECK(p.reward == best);
    CHECK(placement_reward(p.cells, w, cfg.grid) == best);

    const auto two = brute_force_placement(w, cfg.grid, 2);
    CHECK(two.reward >= p.reward);

    auto big = cfg;
    big.grid.nx = big.grid.ny = 40;
    big.n_uavs = 3;
    CHECK_THROWS_AS(brute_force_placement(big), ConfigError);
}

TEST_CASE("centroid baseline") {
    GridSpec g{20, 20, 1.0, 10.0};
    GroundStation bs{{0, 0, 0}};
    const std::vector<UserTerminal> pair{{0, {0, 0, 0}}, {1, {2, 0, 0}}};
    CHECK(baseline_centroid(pair, 1, bs, g) == std::vector<Cell>{{1, 0}});

    const std::vector<UserTerminal> around{{0, {6, 8, 0}}, {1, {10, 8, 0}}, {2, {8, 6, 0}}, {3, {8, 10, 0}}};
    CHECK(baseline_centroid(around, 2, bs, g) == std::vector<Cell>{{4, 4}, {8, 8}});

    const std::vector<UserTerminal> point(5, UserTerminal{0, {13, 5, 0}});
    CHECK(baseline_centroid(point, 1, bs, g) == std::vector<Cell>{{13, 5}});
}

TEST_CASE("losing the only relay leaves direct rates") {
    auto cfg = tiny();
    cfg.failure = FailureSpec{4, 0};
    cfg.eval_steps = 8;
    const auto rec = run_resilience(cfg);
    REQUIRE(rec.step_mean_rate_bps.size() == 8);
    CHECK(rec.victim == std::optional<std::size_t>{0});

    const World w = make_world(cfg);
    const auto direct = evaluate_network(w.bs, std::span<const Uav>{}, w.users, w.radio);
    for (int t = 4; t < 8; ++t) CHECK(rec.step_mean_rate_bps[static_cast<std::size_t>(t)] == mean_of(direct.user_rates_bps));

    const auto s = summarize_resilience(rec, 2);
    CHECK(s.post_plateau_bps == mean_of(direct.user_rates_bps));

    auto bad = cfg;
    bad.failure->step = 8;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("random victims cover every UAV") {
    auto cfg = tiny();
    cfg.n_uavs = 2;
    cfg.episodes = 1;
    cfg.eval_steps = 3;
    cfg.failure = FailureSpec{1, std::nullopt};
    std::set<std::size_t> victims;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        cfg.seed = seed;
        victims.insert(*run_resilience(cfg).victim);
    }
    CHECK(victims == std::set<std::size_t>{0, 1});
}

TEST_CASE("sweeps") {
    auto cfg = tiny();
    cfg.radio.comm_range_m = 1.0;
    const std::vector<double> ranges{10, 40, 80, 200};
    const auto pts = run_coverage_sweep(cfg, SweepAxis::CommRange, ranges, {3, 1, PlacementMethod::Oracle});
    REQUIRE(pts.size() == 4);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        CHECK(pts[k].value == ranges[k]);
        CHECK(pts[k].per_seed.size() == 3);
        if (k > 0) CHECK(pts[k].coverage_mean >= pts[k - 1].coverage_mean);
    }
    const std::string csv = sweep_csv(pts);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

    const std::vector<double> counts{2, 4, 6};
    const auto rows = run_coverage_sweep(cfg, SweepAxis::NUavs, counts, {1, 2, PlacementMethod::Baseline});
    CHECK(rows.size() == 3);
    CHECK(with_axis_value(cfg, SweepAxis::CovarianceScale, 4.0).users.cov[0][0] == 400.0);
}

TEST_CASE("plateau detection") {
    std::vector<double> flat(60, 10.0);
    CHECK(episodes_to_plateau(flat) == std::optional<int>{20});

    std::vector<double> ramp;
    for (int k = 0; k < 100; ++k) ramp.push_back(k < 50 ? k : 50.0);
    const auto p = episodes_to_plateau(ramp);
    REQUIRE(p.has_value());
    CHECK(*p > 40);
    CHECK(*p <= 70);

    std::vector<double> noisy;
    for (int k = 0; k < 60; ++k) noisy.push_back(k % 2 ? 1.0 : 100.0);
    CHECK_FALSE(episodes_to_plateau(noisy).has_value());
    CHECK_FALSE(episodes_to_plateau(std::vector<double>(5, 1.0)).has_value());
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 7) throw DomainError("boom");
                    }),
                    DomainError);
}
