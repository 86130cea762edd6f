#include "iabplace/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "iabplace/errors.hpp"

namespace iabplace {

void GridSpec::validate() const {
    if (nx < 2 || ny < 2) throw ConfigError("grid needs at least 2 cells per axis (grid_nx, grid_ny)");
    if (!(cell_size > 0.0)) throw ConfigError("cell_size_m must be positive");
    if (!(altitude_m > 0.0)) throw ConfigError("altitude_m must be positive");
}

void RewardWeights::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ConfigError("alpha must lie in [0, 1], got " + std::to_string(alpha));
    }
}

std::string_view to_string(Action a) {
    switch (a) {
        case Action::North: return "north";
        case Action::East: return "east";
        case Action::South: return "south";
        case Action::West: return "west";
        case Action::Hover: return "hover";
    }
    return "?";
}

bool in_bounds(const Cell& c, const GridSpec& spec) {
    return c.x >= 0 && c.y >= 0 && c.x < spec.nx && c.y < spec.ny;
}

Position cell_position(const Cell& c, const GridSpec& spec) {
    return {c.x * spec.cell_size, c.y * spec.cell_size, spec.altitude_m};
}

Cell nearest_cell(double x, double y, const GridSpec& spec) {
    const auto snap = [&](double v, int n) {
        const long idx = std::lround(v / spec.cell_size);
        return static_cast<int>(std::clamp<long>(idx, 0, n - 1));
    };
    return {snap(x, spec.nx), snap(y, spec.ny)};
}

EnvState reset(const GridSpec& spec, std::size_t n_uavs, std::span<const Cell> initial) {
    EnvState s;
    s.altitude_m = spec.altitude_m;
    s.alive.assign(n_uavs, true);
    if (initial.empty()) {
        s.cells.assign(n_uavs, Cell{0, 0});
        return s;
    }
    if (initial.size() != n_uavs) {
        throw ConfigError("initial_cells lists " + std::to_string(initial.size()) +
                          " cells for " + std::to_string(n_uavs) + " UAVs");
    }
    for (const Cell& c : initial) {
        if (!in_bounds(c, spec)) {
            throw ConfigError("initial cell (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                              ") is outside the grid");
        }
    }
    s.cells.assign(initial.begin(), initial.end());
    return s;
}

EnvState apply_action(const EnvState& state, std::size_t uav_index, Action action,
                      const GridSpec& spec) {
    EnvState next = state;
    if (!state.alive.at(uav_index)) return next;
    Cell& c = next.cells.at(uav_index);
    switch (action) {
        case Action::North: c.y = std::min(c.y + 1, spec.ny - 1); break;
        case Action::East: c.x = std::min(c.x + 1, spec.nx - 1); break;
        case Action::South: c.y = std::max(c.y - 1, 0); break;
        case Action::West: c.x = std::max(c.x - 1, 0); break;
        case Action::Hover: break;
    }
    return next;
}

std::vector<Uav> uavs_of(const EnvState& state, const GridSpec& spec) {
    std::vector<Uav> out;
    out.reserve(state.cells.size());
    for (std::size_t i = 0; i < state.cells.size(); ++i) {
        Position p = cell_position(state.cells[i], spec);
        p.z = state.altitude_m;
        out.push_back({i, p, static_cast<bool>(state.alive[i])});
    }
    return out;
}

NetworkSnapshot evaluate_state(const EnvState& state, const World& world, const GridSpec& spec) {
    const auto uavs = uavs_of(state, spec);
    return evaluate_network(world.bs, uavs, world.users, world.radio);
}

double percentile(std::span<const double> values, double q) {
    if (values.empty()) throw DomainError("percentile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("percentile rank outside [0, 1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mean_of(std::span<const double> values) {
    if (values.empty()) throw DomainError("mean of an empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double reward(std::span<const double> rates, const RewardWeights& weights) {
    if (rates.empty()) throw DomainError("reward needs at least one user rate");
    return weights.alpha * mean_of(rates) + (1.0 - weights.alpha) * percentile(rates, 0.75);
}

double snapshot_reward(const NetworkSnapshot& snapshot, const World& world) {
    std::vector<double> scaled(snapshot.user_rates_bps);
    for (double& r : scaled) r *= world.reward_scale;
    return reward(scaled, world.weights);
}

StepOutcome step(const EnvState& state, std::span<const Action> joint_action, const World& world,
                 const GridSpec& spec) {
    if (joint_action.size() != state.uav_count()) {
        throw DomainError("joint action has " + std::to_string(joint_action.size()) +
                          " entries for " + std::to_string(state.uav_count()) + " UAVs");
    }
    StepOutcome out;
    out.next_state = state;
    // Every move is computed from the shared pre-state.
    for (std::size_t i = 0; i < joint_action.size(); ++i) {
        out.next_state.cells[i] = apply_action(state, i, joint_action[i], spec).cells[i];
    }
    out.next_state.iteration = state.iteration + 1;
    out.snapshot = evaluate_state(out.next_state, world, spec);
    out.reward = snapshot_reward(out.snapshot, world);
    out.done = out.next_state.iteration >= world.iteration_limit;
    return out;
}

EnvState inject_failure(const EnvState& state, std::size_t uav_index) {
    EnvState next = state;
    if (!next.alive.at(uav_index)) {
        spdlog::warn("UAV {} is already down; failure injection ignored", uav_index);
        return next;
    }
    next.alive[uav_index] = false;
    return next;
}

}  // namespace iabplace
