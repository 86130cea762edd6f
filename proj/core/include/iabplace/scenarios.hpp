#pragma once

// Experiment harness: configuration, user sampling, the training loop,
// greedy evaluation, the exhaustive placement oracle, the centroid
// baseline, failure resilience runs and coverage sweeps.

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iabplace/agent/dueling_net.hpp"
#include "iabplace/agent/epsilon.hpp"
#include "iabplace/agent/learner.hpp"
#include "iabplace/channel.hpp"
#include "iabplace/environment.hpp"
#include "iabplace/rng.hpp"
#include "iabplace/topology.hpp"

namespace iabplace {

struct UserDistribution {
    std::array<double, 2> mean{70.0, 70.0};
    std::array<std::array<double, 2>, 2> cov{{{100.0, 0.0}, {0.0, 50.0}}};

    /// Throws ConfigError unless the covariance is symmetric PSD.
    void validate() const;
};

enum class DecayMode { PerIteration, PerEpisode };

/// After a failure the survivors either keep their own policies (`Same`) or
/// switch to policies pretrained with one UAV fewer (`Reduced`).
enum class RecoveryPolicy { Reduced, Same };

struct FailureSpec {
    int step = 30;
    /// nullopt picks the victim uniformly at random from the run seed.
    std::optional<std::size_t> victim;
};

struct ExperimentConfig {
    RadioParams radio;
    GridSpec grid;
    std::size_t n_uavs = 2;
    std::size_t n_users = 100;
    UserDistribution users;
    Position bs_position{10.0, 0.0, 10.0};
    std::vector<Cell> initial_cells;  // empty: every UAV starts at (0, 0)

    LearnerKind learner = LearnerKind::Tabular;
    TrainConfig train;
    NetShape widths;  // input width is derived from n_uavs
    EpsilonSchedule schedule;
    DecayMode eps_decay = DecayMode::PerIteration;
    RewardWeights weights;
    double reward_scale = 1e-6;

    int episodes = 100;
    int iterations = 100;
    std::uint64_t seed = 0;

    std::optional<FailureSpec> failure;
    int eval_steps = 50;
    RecoveryPolicy recovery = RecoveryPolicy::Reduced;
    bool fine_tune = false;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

struct EpisodeMetrics {
    int episode = 0;
    double reward = 0.0;
    double mean_rate_bps = 0.0;
    double p75_rate_bps = 0.0;
    double coverage = 0.0;
};

struct RunRecord {
    std::vector<EpisodeMetrics> episodes;
    /// Greedy evaluation rollout, one cell sequence per UAV (initial cell first).
    std::vector<std::vector<Cell>> trajectories;
    std::vector<Cell> final_cells;
    NetworkSnapshot final_snapshot;
    double final_reward = 0.0;
    double coverage = 0.0;
    std::optional<double> oracle_reward;

    /// Mean user rate after every evaluation step (resilience runs).
    std::vector<double> step_mean_rate_bps;
    std::optional<int> failure_step;
    std::optional<std::size_t> victim;

    double wall_seconds = 0.0;
    std::string config_hash;
    std::uint64_t seed = 0;
    bool interrupted = false;
};

/// Cooperative cancellation, polled once per episode.
struct RunControl {
    const std::atomic<bool>* stop = nullptr;
    bool stopped() const { return stop != nullptr && stop->load(); }
};

/// `n` users drawn from the 2D Gaussian, clamped into the grid area.
std::vector<UserTerminal> sample_users(const UserDistribution& dist, std::size_t n,
                                       const GridSpec& spec, Rng& rng);

/// BS, users (from the config seed) and radio model for a config.
World make_world(const ExperimentConfig& cfg);

std::vector<std::unique_ptr<Learner>> make_learners(const ExperimentConfig& cfg);

struct TrainingResult {
    RunRecord record;
    std::vector<std::unique_ptr<Learner>> learners;
    EpsilonSchedule schedule;
};

/// Episodes x iterations of: act (epsilon-greedy) -> step (associate, form
/// backhaul, reward) -> learn -> decay epsilon. Finishes with a greedy
/// rollout whose last state is the reported placement.
TrainingResult run_training(const ExperimentConfig& cfg, RunControl control = {});

struct Rollout {
    std::vector<std::vector<Cell>> trajectories;
    std::vector<double> step_mean_rate_bps;
    std::vector<double> step_rewards;
    EnvState final_state;
    NetworkSnapshot final_snapshot;
    double final_reward = 0.0;
};

/// Greedy (epsilon = 0) rollout from the configured initial cells.
Rollout greedy_rollout(std::span<const std::unique_ptr<Learner>> learners,
                       const ExperimentConfig& cfg, const World& world, int steps);

/// Shared reward of a fixed joint placement.
double placement_reward(std::span<const Cell> cells, const World& world, const GridSpec& spec);

struct Placement {
    std::vector<Cell> cells;
    double reward = 0.0;
};

inline constexpr double kBruteForceLimit = 1e6;

/// Exhaustive search over every joint placement; ties keep the
/// lexicographically first. Throws ConfigError when (nx*ny)^U exceeds the
/// search limit.
Placement brute_force_placement(const ExperimentConfig& cfg);
Placement brute_force_placement(const World& world, const GridSpec& spec, std::size_t n_uavs);

/// Last UAV (the chain tail) at the user centroid, the others evenly spaced
/// on the segment from the BS towards it, all snapped to cells.
std::vector<Cell> baseline_centroid(std::span<const UserTerminal> users, std::size_t n_uavs,
                                    const GroundStation& bs, const GridSpec& spec);

/// Greedy evaluation with a UAV failure injected at `failure->step`.
/// Pretrained learners may be passed in; otherwise they are trained here.
RunRecord run_resilience(const ExperimentConfig& cfg,
                         std::vector<std::unique_ptr<Learner>> pretrained = {},
                         std::vector<std::unique_ptr<Learner>> pretrained_reduced = {});

struct ResilienceSummary {
    double pre_plateau_bps = 0.0;
    double post_plateau_bps = 0.0;
    double post_min_bps = 0.0;
};

/// Plateaus are means over the last `window` steps before the failure and
/// at the end of the run; the minimum is taken from the failure step on.
ResilienceSummary summarize_resilience(const RunRecord& record, int window = 10);

enum class SweepAxis { NUavs, CommRange, CovarianceScale };
enum class PlacementMethod { Auto, Learned, Oracle, Baseline };

struct SweepOptions {
    std::size_t seeds = 10;
    std::size_t workers = 1;
    PlacementMethod method = PlacementMethod::Auto;
};

struct SweepPoint {
    double value = 0.0;
    double coverage_mean = 0.0;
    double coverage_std = 0.0;
    std::vector<double> per_seed;
};

/// Coverage of the chosen placement for every (value, seed) pair, averaged
/// per value. Seeds run base.seed, base.seed + 1, ...
std::vector<SweepPoint> run_coverage_sweep(const ExperimentConfig& base, SweepAxis axis,
                                           std::span<const double> values,
                                           const SweepOptions& options = {});

ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value);

/// First episode after which the rolling `window`-episode reward standard
/// deviation stays below `tolerance` times the plateau mean (the mean of
/// the last `window` episodes). nullopt if that never happens.
std::optional<int> episodes_to_plateau(std::span<const double> rewards, std::size_t window = 20,
                                       double tolerance = 0.05);

/// Runs fn(i) for i in [0, n) on `workers` threads. Results must be written
/// to per-index slots by fn.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace iabplace
