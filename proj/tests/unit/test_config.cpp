#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "iabplace/config.hpp"
#include "iabplace/errors.hpp"

using namespace iabplace;

namespace {

std::string error_of(const std::string& yaml) {
    try {
        parse_config_text(yaml);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("empty file gives the documented defaults") {
    const auto cfg = parse_config_text("");
    CHECK(cfg.n_users == 100);
    CHECK(cfg.radio.comm_range_m == 500.0);
    CHECK(cfg.radio.bw_access_hz == 25e6);
    CHECK(cfg.radio.bw_bs_hz == 25e6);
    CHECK(cfg.radio.theta_env == 4.88);
    CHECK(cfg.radio.xi_env == 0.43);
    CHECK(cfg.radio.delta_exp == 2.0);
    CHECK(cfg.radio.eta_los_db == 0.1);
    CHECK(cfg.radio.eta_nlos_db == 21.0);
    CHECK(cfg.weights.alpha == 0.5);
    CHECK(cfg.train.mu == 0.01);
    CHECK(cfg.train.gamma == 0.9);
    CHECK(cfg.schedule.eps_max == 0.99);
    CHECK(cfg.schedule.eps_min == 0.01);
    CHECK(cfg.schedule.eps_delta == 0.01);
    CHECK(cfg.episodes == 100);
    CHECK(cfg.iterations == 100);
    CHECK(cfg.learner == LearnerKind::Tabular);
}

TEST_CASE("invalid values name the key") {
    const auto msg = error_of("alpha: 1.5\n");
    CHECK(msg.find("alpha") != std::string::npos);
    CHECK(msg.find("[0, 1]") != std::string::npos);
    CHECK(error_of("bogus_key: 3\n").find("bogus_key") != std::string::npos);
    CHECK(error_of("grid_nx: 1\n").find("grid_nx") != std::string::npos);
    CHECK(error_of("learner: sarsa\n").find("learner") != std::string::npos);
    CHECK(error_of("n_users: [1, 2]\n").find("n_users") != std::string::npos);
    CHECK_FALSE(error_of("alpha: [\n").empty());
}

TEST_CASE("learner dispatch") {
    CHECK(parse_config_text("learner: d3qn\n").learner == LearnerKind::D3qn);
    const auto cfg = parse_config_text("learner: d3qn\nn_uavs: 3\n");
    const auto learners = make_learners(cfg);
    REQUIRE(learners.size() == 3);
    for (const auto& l : learners) CHECK(l->kind() == LearnerKind::D3qn);
}

TEST_CASE("scenario keys") {
    const auto cfg = parse_config_text(
        "grid_nx: 4\ngrid_ny: 5\ncell_size_m: 30\nuser_mean: [60, 50]\n"
        "user_cov: [[4, 1], [1, 9]]\nbs_position: [0, 0, 12]\ninitial_cells: [[1, 0], [0, 1]]\n"
        "tx_power_dbm: 10\ntx_power_backhaul_dbm: 20\nfailure_step: 5\neval_steps: 8\n");
    CHECK(cfg.grid.nx == 4);
    CHECK(cfg.grid.ny == 5);
    CHECK(cfg.users.cov[0][1] == 1.0);
    CHECK(cfg.bs_position == Position{0, 0, 12});
    CHECK(cfg.initial_cells == std::vector<Cell>{{1, 0}, {0, 1}});
    CHECK(cfg.radio.tx_power_mw[0] == doctest::Approx(10.0));
    CHECK(cfg.radio.tx_power_mw[2] == doctest::Approx(100.0));
    REQUIRE(cfg.failure.has_value());
    CHECK(cfg.failure->step == 5);
    CHECK_FALSE(cfg.failure->victim.has_value());
    CHECK(error_of("failure_step: 60\neval_steps: 50\n").find("failure") != std::string::npos);
}

TEST_CASE("overrides beat the file") {
    const auto cfg = parse_config_text("n_users: 10\n", {{"n_users", "7"}, {"alpha", "0.25"}});
    CHECK(cfg.n_users == 7);
    CHECK(cfg.weights.alpha == 0.25);
    CHECK_THROWS_AS(parse_config_text("", {{"nope", "1"}}), ConfigError);

    ::setenv("IABPLACE_EPISODES", "12", 1);
    const auto env = environment_overrides();
    ::unsetenv("IABPLACE_EPISODES");
    REQUIRE(env.count("episodes") == 1);
    CHECK(parse_config_text("", env).episodes == 12);
}

TEST_CASE("files") {
    const auto path = std::filesystem::temp_directory_path() / "iabplace_unit_cfg.yaml";
    std::ofstream(path) << "seed: 99\n";
    CHECK(parse_config(path, {}).seed == 99);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(parse_config(path, {}), ConfigError);
}

TEST_CASE("render and hash") {
    const auto a = parse_config_text("alpha: 0.3\nseed: 1\n");
    const auto b = parse_config_text("alpha: 0.3\nseed: 2\n");
    const auto c = parse_config_text("alpha: 0.4\nseed: 1\n");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a).size() == 16);

    const auto round = parse_config_text(render_config(c));
    CHECK(render_config(round) == render_config(c));
    CHECK(config_hash(round) == config_hash(c));
}
