#include "iabplace/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "iabplace/config.hpp"
#include "iabplace/errors.hpp"

namespace iabplace {

namespace {

// Independent random streams derived from the run seed.
constexpr std::uint64_t kUserStream = 1;
constexpr std::uint64_t kVictimStream = 2;
constexpr std::uint64_t kExploreStream = 10;   // + UAV index
constexpr std::uint64_t kRolloutStream = 500;  // + UAV index
constexpr std::uint64_t kLearnerStream = 1000; // + UAV index

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::vector<Rng> per_uav_streams(std::uint64_t seed, std::uint64_t base, std::size_t n) {
    std::vector<Rng> out;
    out.reserve(n);
    for (std::size_t u = 0; u < n; ++u) out.push_back(make_rng(seed, base + u));
    return out;
}

std::vector<Action> greedy_joint_action(std::span<const std::unique_ptr<Learner>> learners,
                                        const EnvState& state, std::vector<Rng>& tie_rngs) {
    std::vector<Action> joint(state.uav_count(), Action::Hover);
    for (const auto& l : learners) {
        const std::size_t u = l->uav_index();
        if (!state.alive[u]) continue;
        const ActionValues q = l->action_values(state);
        joint[u] = greedy_action(q, tie_rngs[u]);
    }
    return joint;
}

double stddev(std::span<const double> xs) {
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

void UserDistribution::validate() const {
    for (double m : mean) {
        if (!std::isfinite(m)) throw ConfigError("user_mean must be finite");
    }
    const double a = cov[0][0];
    const double b = cov[0][1];
    const double c = cov[1][0];
    const double d = cov[1][1];
    const double scale = std::max({std::abs(a), std::abs(d), std::abs(b), 1.0});
    if (!std::isfinite(a + b + c + d)) throw ConfigError("user_cov must be finite");
    if (std::abs(b - c) > 1e-12 * scale) throw ConfigError("user_cov must be symmetric");
    if (a < 0.0 || d < 0.0 || a * d - b * c < -1e-12 * scale * scale) {
        throw ConfigError("user_cov must be positive semi-definite");
    }
}

void ExperimentConfig::validate() const {
    radio.validate();
    grid.validate();
    weights.validate();
    schedule.validate();
    train.validate();
    users.validate();
    if (n_uavs == 0) throw ConfigError("n_uavs must be at least 1");
    if (n_users == 0) throw ConfigError("n_users must be at least 1");
    if (episodes < 0) throw ConfigError("episodes must be >= 0");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (!(reward_scale > 0.0)) throw ConfigError("reward_scale must be positive");
    if (bs_position.z < 0.0) throw ConfigError("bs_position must have z >= 0");
    if (!initial_cells.empty()) {
        if (initial_cells.size() != n_uavs) throw ConfigError("initial_cells must list one cell per UAV");
        for (const Cell& c : initial_cells) {
            if (!in_bounds(c, grid)) throw ConfigError("initial_cells entry outside the grid");
        }
    }
    if (eval_steps < 1) throw ConfigError("eval_steps must be >= 1");
    if (failure) {
        if (failure->step < 1 || failure->step >= eval_steps) {
            throw ConfigError("failure_step must lie inside the evaluation run (1 .. eval_steps - 1)");
        }
        if (failure->victim && *failure->victim >= n_uavs) {
            throw ConfigError("failure_victim must be a valid UAV index");
        }
    }
}

std::vector<UserTerminal> sample_users(const UserDistribution& dist, std::size_t n,
                                       const GridSpec& spec, Rng& rng) {
    dist.validate();
    // 2x2 Cholesky that tolerates a singular (semi-definite) covariance.
    const double l11 = std::sqrt(dist.cov[0][0]);
    const double l21 = l11 > 0.0 ? dist.cov[1][0] / l11 : 0.0;
    const double l22 = std::sqrt(std::max(dist.cov[1][1] - l21 * l21, 0.0));

    std::vector<UserTerminal> users;
    users.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = standard_normal(rng);
        const double z2 = standard_normal(rng);
        const double x = dist.mean[0] + l11 * z1;
        const double y = dist.mean[1] + l21 * z1 + l22 * z2;
        users.push_back({i, {std::clamp(x, 0.0, spec.x_max()), std::clamp(y, 0.0, spec.y_max()), 0.0}});
    }
    return users;
}

World make_world(const ExperimentConfig& cfg) {
    World w;
    w.bs.pos = cfg.bs_position;
    Rng rng = make_rng(cfg.seed, kUserStream);
    w.users = sample_users(cfg.users, cfg.n_users, cfg.grid, rng);
    w.radio = cfg.radio;
    w.weights = cfg.weights;
    w.reward_scale = cfg.reward_scale;
    w.iteration_limit = cfg.iterations;
    return w;
}

std::vector<std::unique_ptr<Learner>> make_learners(const ExperimentConfig& cfg) {
    std::vector<std::unique_ptr<Learner>> out;
    out.reserve(cfg.n_uavs);
    for (std::size_t u = 0; u < cfg.n_uavs; ++u) {
        if (cfg.learner == LearnerKind::Tabular) {
            out.push_back(std::make_unique<TabularLearner>(u, cfg.grid, cfg.train.mu, cfg.train.gamma));
        } else {
            const std::uint64_t seed = make_rng(cfg.seed, kLearnerStream + u)();
            out.push_back(std::make_unique<D3qnLearner>(u, cfg.n_uavs, cfg.grid, cfg.widths, cfg.train, seed));
        }
    }
    return out;
}

TrainingResult run_training(const ExperimentConfig& cfg, RunControl control) {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    const World world = make_world(cfg);

    TrainingResult result;
    result.learners = make_learners(cfg);
    result.schedule = cfg.schedule;
    RunRecord& rec = result.record;
    rec.config_hash = config_hash(cfg);
    rec.seed = cfg.seed;

    std::vector<Rng> explore = per_uav_streams(cfg.seed, kExploreStream, cfg.n_uavs);
    EpsilonSchedule& eps = result.schedule;

    for (int e = 0; e < cfg.episodes; ++e) {
        if (control.stopped()) {
            rec.interrupted = true;
            break;
        }
        EnvState state = reset(cfg.grid, cfg.n_uavs, cfg.initial_cells);
        double reward_sum = 0.0;
        double mean_sum = 0.0;
        double p75_sum = 0.0;
        double cov_sum = 0.0;
        for (int i = 0; i < cfg.iterations; ++i) {
            std::vector<Action> joint(cfg.n_uavs, Action::Hover);
            for (const auto& l : result.learners) {
                const std::size_t u = l->uav_index();
                if (!state.alive[u]) continue;
                joint[u] = select_action(l->action_values(state), eps, explore[u]);
            }
            StepOutcome out = step(state, joint, world, cfg.grid);
            for (const auto& l : result.learners) {
                const std::size_t u = l->uav_index();
                if (!state.alive[u]) continue;
                // Episodes end on an iteration cap, not a terminal state.
                l->observe(state, joint[u], out.reward, out.next_state, false);
            }
            if (cfg.eps_decay == DecayMode::PerIteration) eps = decay(eps);

            reward_sum += out.reward;
            mean_sum += mean_of(out.snapshot.user_rates_bps);
            p75_sum += percentile(out.snapshot.user_rates_bps, 0.75);
            cov_sum += coverage_ratio(out.snapshot, cfg.radio);
            state = std::move(out.next_state);
        }
        if (cfg.eps_decay == DecayMode::PerEpisode) eps = decay(eps);
        const double n = cfg.iterations;
        rec.episodes.push_back({e + 1, reward_sum / n, mean_sum / n, p75_sum / n, cov_sum / n});
    }

    Rollout roll = greedy_rollout(result.learners, cfg, world, cfg.episodes > 0 ? cfg.iterations : 0);
    rec.trajectories = std::move(roll.trajectories);
    rec.final_cells = roll.final_state.cells;
    rec.final_reward = roll.final_reward;
    rec.coverage = coverage_ratio(roll.final_snapshot, cfg.radio);
    rec.final_snapshot = std::move(roll.final_snapshot);
    rec.wall_seconds = elapsed_seconds(started);
    return result;
}

Rollout greedy_rollout(std::span<const std::unique_ptr<Learner>> learners,
                       const ExperimentConfig& cfg, const World& world, int steps) {
    Rollout roll;
    std::vector<Rng> ties = per_uav_streams(cfg.seed, kRolloutStream, cfg.n_uavs);
    EnvState state = reset(cfg.grid, cfg.n_uavs, cfg.initial_cells);
    roll.trajectories.assign(cfg.n_uavs, {});
    for (std::size_t u = 0; u < cfg.n_uavs; ++u) roll.trajectories[u].push_back(state.cells[u]);

    roll.final_snapshot = evaluate_state(state, world, cfg.grid);
    roll.final_reward = snapshot_reward(roll.final_snapshot, world);
    for (int t = 0; t < steps; ++t) {
        const auto joint = greedy_joint_action(learners, state, ties);
        StepOutcome out = step(state, joint, world, cfg.grid);
        state = std::move(out.next_state);
        for (std::size_t u = 0; u < cfg.n_uavs; ++u) roll.trajectories[u].push_back(state.cells[u]);
        roll.step_mean_rate_bps.push_back(mean_of(out.snapshot.user_rates_bps));
        roll.step_rewards.push_back(out.reward);
        roll.final_reward = out.reward;
        roll.final_snapshot = std::move(out.snapshot);
    }
    roll.final_state = std::move(state);
    return roll;
}

double placement_reward(std::span<const Cell> cells, const World& world, const GridSpec& spec) {
    EnvState s = reset(spec, cells.size(), cells);
    return snapshot_reward(evaluate_state(s, world, spec), world);
}

Placement brute_force_placement(const World& world, const GridSpec& spec, std::size_t n_uavs) {
    const double space = std::pow(static_cast<double>(spec.cell_count()), static_cast<double>(n_uavs));
    if (space > kBruteForceLimit) {
        throw ConfigError("exhaustive placement search over " + std::to_string(spec.cell_count()) + "^" +
                          std::to_string(n_uavs) + " placements exceeds the 1e6 limit");
    }
    // Cells in lexicographic (x, y) order; joint placements enumerated as an
    // odometer whose most significant digit is UAV 0.
    std::vector<Cell> order;
    order.reserve(spec.cell_count());
    for (int x = 0; x < spec.nx; ++x) {
        for (int y = 0; y < spec.ny; ++y) order.push_back({x, y});
    }
    std::vector<std::size_t> digit(n_uavs, 0);
    std::vector<Cell> cells(n_uavs, order[0]);
    EnvState state = reset(spec, n_uavs);

    Placement best;
    bool first = true;
    while (true) {
        for (std::size_t u = 0; u < n_uavs; ++u) state.cells[u] = order[digit[u]];
        const double r = snapshot_reward(evaluate_state(state, world, spec), world);
        if (first || r > best.reward) {
            best.reward = r;
            best.cells = state.cells;
            first = false;
        }
        std::size_t k = n_uavs;
        while (k > 0) {
            --k;
            if (++digit[k] < order.size()) break;
            digit[k] = 0;
            if (k == 0) return best;
        }
        if (n_uavs == 0) return best;
    }
}

Placement brute_force_placement(const ExperimentConfig& cfg) {
    cfg.validate();
    return brute_force_placement(make_world(cfg), cfg.grid, cfg.n_uavs);
}

std::vector<Cell> baseline_centroid(std::span<const UserTerminal> users, std::size_t n_uavs,
                                    const GroundStation& bs, const GridSpec& spec) {
    if (users.empty()) throw DomainError("baseline placement needs at least one user");
    double cx = 0.0;
    double cy = 0.0;
    for (const UserTerminal& u : users) {
        cx += u.pos.x;
        cy += u.pos.y;
    }
    cx /= static_cast<double>(users.size());
    cy /= static_cast<double>(users.size());

    std::vector<Cell> cells;
    cells.reserve(n_uavs);
    // Relays k = 1 .. U-1 at fraction k / U of the way from the BS.
    for (std::size_t k = 1; k < n_uavs; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(n_uavs);
        cells.push_back(nearest_cell(bs.pos.x + f * (cx - bs.pos.x), bs.pos.y + f * (cy - bs.pos.y), spec));
    }
    if (n_uavs > 0) cells.push_back(nearest_cell(cx, cy, spec));
    return cells;
}

RunRecord run_resilience(const ExperimentConfig& cfg, std::vector<std::unique_ptr<Learner>> pretrained,
                         std::vector<std::unique_ptr<Learner>> pretrained_reduced) {
    cfg.validate();
    if (!cfg.failure) throw ConfigError("resilience runs need failure_step");
    const auto started = std::chrono::steady_clock::now();
    const FailureSpec failure = *cfg.failure;
    const World world = make_world(cfg);

    if (pretrained.empty()) pretrained = run_training(cfg).learners;
    if (pretrained.size() != cfg.n_uavs) throw ConfigError("pretrained model does not match n_uavs");

    const bool reduced = cfg.recovery == RecoveryPolicy::Reduced && cfg.n_uavs >= 2;
    ExperimentConfig reduced_cfg = cfg;
    if (reduced) {
        reduced_cfg.n_uavs = cfg.n_uavs - 1;
        if (!reduced_cfg.initial_cells.empty()) reduced_cfg.initial_cells.pop_back();
        reduced_cfg.failure.reset();
        if (pretrained_reduced.empty()) pretrained_reduced = run_training(reduced_cfg).learners;
        if (pretrained_reduced.size() != reduced_cfg.n_uavs) {
            throw ConfigError("reduced pretrained model does not match n_uavs - 1");
        }
    }

    RunRecord rec;
    rec.config_hash = config_hash(cfg);
    rec.seed = cfg.seed;
    rec.failure_step = failure.step;
    Rng victim_rng = make_rng(cfg.seed, kVictimStream);
    const std::size_t victim = failure.victim ? *failure.victim
                                              : static_cast<std::size_t>(uniform_index(victim_rng, cfg.n_uavs));
    rec.victim = victim;

    std::vector<Rng> ties = per_uav_streams(cfg.seed, kRolloutStream, cfg.n_uavs);
    EpsilonSchedule tune_eps{cfg.schedule.eps_min, cfg.schedule.eps_min, cfg.schedule.eps_delta,
                             cfg.schedule.eps_min};
    EnvState state = reset(cfg.grid, cfg.n_uavs, cfg.initial_cells);
    rec.trajectories.assign(cfg.n_uavs, {});
    for (std::size_t u = 0; u < cfg.n_uavs; ++u) rec.trajectories[u].push_back(state.cells[u]);

    NetworkSnapshot last;
    for (int t = 0; t < cfg.eval_steps; ++t) {
        if (t == failure.step) state = inject_failure(state, victim);
        const bool after = t >= failure.step;

        std::vector<Action> joint(cfg.n_uavs, Action::Hover);
        // Survivors in id order map onto the reduced policy's slots.
        std::vector<std::size_t> survivors;
        EnvState sub;
        if (after && reduced) {
            sub.altitude_m = state.altitude_m;
            for (std::size_t u = 0; u < cfg.n_uavs; ++u) {
                if (!state.alive[u]) continue;
                survivors.push_back(u);
                sub.cells.push_back(state.cells[u]);
                sub.alive.push_back(true);
            }
            for (std::size_t k = 0; k < survivors.size(); ++k) {
                const ActionValues q = pretrained_reduced[k]->action_values(sub);
                joint[survivors[k]] = after && cfg.fine_tune ? select_action(q, tune_eps, ties[survivors[k]])
                                                            : greedy_action(q, ties[survivors[k]]);
            }
        } else {
            for (const auto& l : pretrained) {
                const std::size_t u = l->uav_index();
                if (!state.alive[u]) continue;
                const ActionValues q = l->action_values(state);
                joint[u] = after && cfg.fine_tune ? select_action(q, tune_eps, ties[u]) : greedy_action(q, ties[u]);
            }
        }

        StepOutcome out = step(state, joint, world, cfg.grid);
        if (after && cfg.fine_tune) {
            if (reduced) {
                EnvState sub_next = sub;
                for (std::size_t k = 0; k < survivors.size(); ++k) sub_next.cells[k] = out.next_state.cells[survivors[k]];
                for (std::size_t k = 0; k < survivors.size(); ++k) {
                    pretrained_reduced[k]->observe(sub, joint[survivors[k]], out.reward, sub_next, false);
                }
            } else {
                for (const auto& l : pretrained) {
                    const std::size_t u = l->uav_index();
                    if (state.alive[u]) l->observe(state, joint[u], out.reward, out.next_state, false);
                }
            }
        }
        state = std::move(out.next_state);
        for (std::size_t u = 0; u < cfg.n_uavs; ++u) rec.trajectories[u].push_back(state.cells[u]);
        rec.step_mean_rate_bps.push_back(mean_of(out.snapshot.user_rates_bps));
        rec.final_reward = out.reward;
        last = std::move(out.snapshot);
    }
    rec.final_cells = state.cells;
    rec.coverage = coverage_ratio(last, cfg.radio);
    rec.final_snapshot = std::move(last);
    rec.wall_seconds = elapsed_seconds(started);
    return rec;
}

ResilienceSummary summarize_resilience(const RunRecord& record, int window) {
    if (!record.failure_step) throw DomainError("record has no failure step");
    const auto& s = record.step_mean_rate_bps;
    const auto f = static_cast<std::size_t>(*record.failure_step);
    if (f == 0 || f >= s.size()) throw DomainError("failure step outside the recorded series");
    const std::size_t w = std::max<std::size_t>(1, static_cast<std::size_t>(window));
    const std::size_t pre_w = std::min(w, f);
    const std::size_t post_w = std::min(w, s.size() - f);

    ResilienceSummary out;
    out.pre_plateau_bps = mean_of(std::span(s).subspan(f - pre_w, pre_w));
    out.post_plateau_bps = mean_of(std::span(s).subspan(s.size() - post_w, post_w));
    out.post_min_bps = *std::min_element(s.begin() + static_cast<std::ptrdiff_t>(f), s.end());
    return out;
}

ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value) {
    ExperimentConfig cfg = base;
    switch (axis) {
        case SweepAxis::NUavs: {
            if (!(value >= 1.0) || value != std::floor(value)) throw ConfigError("n_uavs sweep values must be positive integers");
            cfg.n_uavs = static_cast<std::size_t>(value);
            if (cfg.initial_cells.size() != cfg.n_uavs) cfg.initial_cells.clear();
            if (cfg.failure && cfg.failure->victim && *cfg.failure->victim >= cfg.n_uavs) cfg.failure.reset();
            break;
        }
        case SweepAxis::CommRange:
            cfg.radio.comm_range_m = value;
            break;
        case SweepAxis::CovarianceScale:
            if (!(value >= 0.0)) throw ConfigError("covariance scale must be >= 0");
            for (auto& row : cfg.users.cov) {
                for (double& v : row) v *= value;
            }
            break;
    }
    return cfg;
}

std::vector<SweepPoint> run_coverage_sweep(const ExperimentConfig& base, SweepAxis axis,
                                           std::span<const double> values, const SweepOptions& options) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if (options.seeds == 0) throw ConfigError("sweep needs at least one seed");
    const std::size_t jobs = values.size() * options.seeds;
    std::vector<double> coverage(jobs, 0.0);

    parallel_for(jobs, options.workers, [&](std::size_t job) {
        const std::size_t vi = job / options.seeds;
        const std::size_t si = job % options.seeds;
        ExperimentConfig cfg = with_axis_value(base, axis, values[vi]);
        cfg.seed = base.seed + si;
        cfg.validate();
        const World world = make_world(cfg);

        PlacementMethod method = options.method;
        if (method == PlacementMethod::Auto) {
            const double space = std::pow(static_cast<double>(cfg.grid.cell_count()), static_cast<double>(cfg.n_uavs));
            method = space <= 2.0e5 ? PlacementMethod::Oracle : PlacementMethod::Learned;
        }
        std::vector<Cell> cells;
        switch (method) {
            case PlacementMethod::Oracle: cells = brute_force_placement(world, cfg.grid, cfg.n_uavs).cells; break;
            case PlacementMethod::Baseline: cells = baseline_centroid(world.users, cfg.n_uavs, world.bs, cfg.grid); break;
            default: cells = run_training(cfg).record.final_cells; break;
        }
        EnvState s = reset(cfg.grid, cfg.n_uavs, cells);
        coverage[job] = coverage_ratio(evaluate_state(s, world, cfg.grid), cfg.radio);
    });

    std::vector<SweepPoint> out;
    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        SweepPoint p;
        p.value = values[vi];
        p.per_seed.assign(coverage.begin() + static_cast<std::ptrdiff_t>(vi * options.seeds),
                          coverage.begin() + static_cast<std::ptrdiff_t>((vi + 1) * options.seeds));
        p.coverage_mean = mean_of(p.per_seed);
        p.coverage_std = stddev(p.per_seed);
        out.push_back(std::move(p));
    }
    return out;
}

std::optional<int> episodes_to_plateau(std::span<const double> rewards, std::size_t window, double tolerance) {
    if (window == 0 || rewards.size() < window) return std::nullopt;
    const double plateau = mean_of(rewards.subspan(rewards.size() - window, window));
    std::optional<int> first;
    for (std::size_t end = window; end <= rewards.size(); ++end) {
        const double sd = stddev(rewards.subspan(end - window, window));
        if (sd < tolerance * std::abs(plateau)) {
            if (!first) first = static_cast<int>(end);
        } else {
            first.reset();
        }
    }
    return first;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace iabplace
