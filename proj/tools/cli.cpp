#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "iabplace/agent/checkpoint.hpp"
#include "iabplace/config.hpp"
#include "iabplace/errors.hpp"
#include "iabplace/record_io.hpp"
#include "iabplace/scenarios.hpp"

namespace iabplace::cli {

namespace {

namespace fs = std::filesystem;

struct CliConfig {
    std::string subcommand;
    std::string config_path;  // empty: defaults plus environment overrides
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
    std::size_t workers = 1;

    std::string checkpoint;
    std::string axis;
    std::string values;
    std::size_t seeds = 10;
    std::string method = "auto";
    bool with_oracle = false;
    std::optional<int> failure_step;
};

std::string cells_text(std::span<const Cell> cells) {
    std::string s;
    for (std::size_t u = 0; u < cells.size(); ++u) {
        if (u > 0) s += ' ';
        s += "uav" + std::to_string(u) + "=(" + std::to_string(cells[u].x) + "," + std::to_string(cells[u].y) + ")";
    }
    return s;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

ExperimentConfig load(const CliConfig& cli) {
    ExperimentConfig cfg = cli.config_path.empty() ? parse_config_text("", environment_overrides())
                                                   : parse_config(cli.config_path);
    if (cli.seed) cfg.seed = *cli.seed;
    if (cli.failure_step) {
        if (!cfg.failure) cfg.failure.emplace();
        cfg.failure->step = *cli.failure_step;
    }
    cfg.validate();
    return cfg;
}

fs::path checkpoint_path(const fs::path& dir, const RunRecord& rec) {
    return dir / ("model_" + artifact_stem(rec) + ".json");
}

int cmd_train(const CliConfig& cli, const std::atomic<bool>* stop) {
    const ExperimentConfig cfg = load(cli);
    spdlog::info("training {} learner(s), {} episodes x {} iterations, seed {}", cfg.n_uavs, cfg.episodes,
                 cfg.iterations, cfg.seed);
    TrainingResult result = run_training(cfg, RunControl{stop});
    RunRecord& rec = result.record;
    if (cli.with_oracle) rec.oracle_reward = brute_force_placement(cfg).reward;

    const RunFiles files = write_run_artifacts(cli.out_dir, rec);
    save_checkpoint(checkpoint_path(cli.out_dir, rec), {rec.config_hash, result.schedule}, result.learners);
    if (rec.interrupted) spdlog::warn("interrupted after {} episodes; partial results written", rec.episodes.size());

    std::cout << "placement " << cells_text(rec.final_cells) << "\n"
              << "reward " << num(rec.final_reward) << " coverage " << num(rec.coverage) << "\n";
    if (rec.oracle_reward) std::cout << "oracle_reward " << num(*rec.oracle_reward) << "\n";
    std::cout << "metrics " << files.metrics.string() << "\n";
    return rec.interrupted ? kExitRuntime : kExitOk;
}

int cmd_evaluate(const CliConfig& cli) {
    const ExperimentConfig cfg = load(cli);
    if (cli.checkpoint.empty()) throw ConfigError("evaluate needs --checkpoint");
    auto learners = make_learners(cfg);
    const CheckpointHeader header = load_checkpoint(cli.checkpoint, learners);
    if (header.config_hash != config_hash(cfg)) {
        spdlog::warn("checkpoint was trained with config {}, evaluating under {}", header.config_hash,
                     config_hash(cfg));
    }
    const World world = make_world(cfg);
    Rollout roll = greedy_rollout(learners, cfg, world, cfg.iterations);

    RunRecord rec;
    rec.config_hash = config_hash(cfg);
    rec.seed = cfg.seed;
    rec.trajectories = std::move(roll.trajectories);
    rec.final_cells = roll.final_state.cells;
    rec.final_reward = roll.final_reward;
    rec.coverage = coverage_ratio(roll.final_snapshot, cfg.radio);
    rec.final_snapshot = std::move(roll.final_snapshot);
    write_run_artifacts(cli.out_dir, rec);
    std::cout << "placement " << cells_text(rec.final_cells) << "\n"
              << "reward " << num(rec.final_reward) << " coverage " << num(rec.coverage) << "\n";
    return kExitOk;
}

int cmd_oracle(const CliConfig& cli) {
    const ExperimentConfig cfg = load(cli);
    const Placement best = brute_force_placement(cfg);
    std::cout << "best " << cells_text(best.cells) << "\n" << "reward " << num(best.reward) << "\n";
    return kExitOk;
}

int cmd_baseline(const CliConfig& cli) {
    const ExperimentConfig cfg = load(cli);
    const World world = make_world(cfg);
    const auto cells = baseline_centroid(world.users, cfg.n_uavs, world.bs, cfg.grid);
    EnvState s = reset(cfg.grid, cfg.n_uavs, cells);
    const NetworkSnapshot snap = evaluate_state(s, world, cfg.grid);
    std::cout << "baseline " << cells_text(cells) << "\n"
              << "reward " << num(snapshot_reward(snap, world)) << " coverage "
              << num(coverage_ratio(snap, cfg.radio)) << "\n";
    return kExitOk;
}

int cmd_resilience(const CliConfig& cli) {
    ExperimentConfig cfg = load(cli);
    if (!cfg.failure) throw ConfigError("resilience needs failure_step (config key or --failure-step)");
    RunRecord rec = run_resilience(cfg);
    write_run_artifacts(cli.out_dir, rec);
    const ResilienceSummary s = summarize_resilience(rec);
    std::cout << "victim uav" << *rec.victim << " at step " << *rec.failure_step << "\n"
              << "pre_plateau_bps " << num(s.pre_plateau_bps) << " post_plateau_bps " << num(s.post_plateau_bps)
              << " post_min_bps " << num(s.post_min_bps) << "\n";
    return kExitOk;
}

SweepAxis parse_axis(const std::string& s) {
    if (s == "n_uavs") return SweepAxis::NUavs;
    if (s == "comm_range") return SweepAxis::CommRange;
    if (s == "covariance_scale") return SweepAxis::CovarianceScale;
    throw ConfigError("--axis must be n_uavs, comm_range or covariance_scale");
}

PlacementMethod parse_method(const std::string& s) {
    if (s == "auto") return PlacementMethod::Auto;
    if (s == "learned") return PlacementMethod::Learned;
    if (s == "oracle") return PlacementMethod::Oracle;
    if (s == "baseline") return PlacementMethod::Baseline;
    throw ConfigError("--method must be auto, learned, oracle or baseline");
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("--values entry '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw ConfigError("--values needs at least one number");
    return out;
}

int cmd_sweep(const CliConfig& cli) {
    const ExperimentConfig cfg = load(cli);
    const SweepAxis axis = parse_axis(cli.axis);
    const auto values = parse_values(cli.values);
    SweepOptions opt{cli.seeds, cli.workers, parse_method(cli.method)};
    const auto points = run_coverage_sweep(cfg, axis, values, opt);

    fs::create_directories(cli.out_dir);
    const fs::path path = fs::path(cli.out_dir) / ("sweep_" + cli.axis + "_" + config_hash(cfg) + "_s" +
                                                   std::to_string(cfg.seed) + ".csv");
    write_text(path, sweep_csv(points));
    std::cout << cli.axis << "  coverage_mean  coverage_std\n";
    for (const SweepPoint& p : points) {
        std::cout << num(p.value) << "  " << num(p.coverage_mean) << "  " << num(p.coverage_std) << "\n";
    }
    return kExitOk;
}

}  // namespace

int run(int argc, char** argv, const std::atomic<bool>* stop) {
    CliConfig cli;
    CLI::App app{"UAV IAB relay placement simulator"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto common = [&cli](CLI::App* sub) {
        sub->add_option("-c,--config", cli.config_path, "YAML config file")->check(CLI::ExistingFile);
        sub->add_option("-o,--out", cli.out_dir, "output directory");
        sub->add_option("-s,--seed", cli.seed, "seed override (64-bit unsigned)");
        sub->add_flag("-v,--verbose", cli.verbosity, "more logging (repeatable)");
        sub->add_option("-w,--workers", cli.workers, "worker threads")->check(CLI::PositiveNumber);
    };

    auto* train = app.add_subcommand("train", "train learners, write metrics, trajectory and checkpoint");
    common(train);
    train->add_flag("--with-oracle", cli.with_oracle, "also run the exhaustive placement search");
    auto* evaluate = app.add_subcommand("evaluate", "greedy rollout from a checkpoint");
    common(evaluate);
    evaluate->add_option("--checkpoint", cli.checkpoint, "model file written by train")->required();
    auto* oracle = app.add_subcommand("oracle", "exhaustive placement search");
    common(oracle);
    auto* baseline = app.add_subcommand("baseline", "centroid baseline placement");
    common(baseline);
    auto* resilience = app.add_subcommand("resilience", "evaluation run with one UAV failure");
    common(resilience);
    resilience->add_option("--failure-step", cli.failure_step, "step at which the UAV fails");
    auto* sweep = app.add_subcommand("sweep", "coverage sweep over one axis");
    common(sweep);
    sweep->add_option("--axis", cli.axis, "n_uavs | comm_range | covariance_scale")->required();
    sweep->add_option("--values", cli.values, "comma separated values")->required();
    sweep->add_option("--seeds", cli.seeds, "seeds per value")->check(CLI::PositiveNumber);
    sweep->add_option("--method", cli.method, "auto | learned | oracle | baseline");
    auto* selftest = app.add_subcommand("selftest", "run the invariant suite");
    selftest->add_flag("-v,--verbose", cli.verbosity, "more logging");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    cli.subcommand = app.get_subcommands().front()->get_name();
    spdlog::set_level(cli.verbosity >= 2 ? spdlog::level::debug
                      : cli.verbosity == 1 ? spdlog::level::info
                                           : spdlog::level::warn);

    try {
        if (cli.subcommand == "train") return cmd_train(cli, stop);
        if (cli.subcommand == "evaluate") return cmd_evaluate(cli);
        if (cli.subcommand == "oracle") return cmd_oracle(cli);
        if (cli.subcommand == "baseline") return cmd_baseline(cli);
        if (cli.subcommand == "resilience") return cmd_resilience(cli);
        if (cli.subcommand == "sweep") return cmd_sweep(cli);
        return run_selftest() == 0 ? kExitOk : kExitRuntime;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace iabplace::cli
