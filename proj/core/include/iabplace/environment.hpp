#pragma once

// Grid MDP over UAV placements: five-action move set, boundary clamping,
// shared reward and failure injection.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "iabplace/channel.hpp"
#include "iabplace/topology.hpp"

namespace iabplace {

struct GridSpec {
    int nx = 10;
    int ny = 10;
    double cell_size = 10.0;
    double altitude_m = 100.0;

    double x_max() const { return (nx - 1) * cell_size; }
    double y_max() const { return (ny - 1) * cell_size; }
    std::size_t cell_count() const { return static_cast<std::size_t>(nx) * ny; }

    void validate() const;
};

/// North = +y, East = +x.
enum class Action : std::uint8_t { North = 0, East = 1, South = 2, West = 3, Hover = 4 };

inline constexpr std::size_t kActionCount = 5;
inline constexpr std::array<Action, kActionCount> kAllActions{
    Action::North, Action::East, Action::South, Action::West, Action::Hover};

std::string_view to_string(Action a);

struct Cell {
    int x = 0;
    int y = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct EnvState {
    std::vector<Cell> cells;
    std::vector<bool> alive;
    double altitude_m = 0.0;
    int iteration = 0;

    std::size_t uav_count() const { return cells.size(); }
    friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct RewardWeights {
    double alpha = 0.5;

    void validate() const;
};

/// Everything a step needs besides the state: the fixed ground entities,
/// the radio model and the reward configuration.
struct World {
    GroundStation bs;
    std::vector<UserTerminal> users;
    RadioParams radio;
    RewardWeights weights;
    /// Multiplier applied to bps before the reward statistic (1e-6: Mbps).
    double reward_scale = 1e-6;
    int iteration_limit = 100;
};

struct StepOutcome {
    EnvState next_state;
    double reward = 0.0;
    NetworkSnapshot snapshot;
    bool done = false;
};

bool in_bounds(const Cell& c, const GridSpec& spec);

Position cell_position(const Cell& c, const GridSpec& spec);

/// Nearest grid cell to a planar point, clamped into the grid.
Cell nearest_cell(double x, double y, const GridSpec& spec);

/// Initial state. With no explicit cells every UAV starts at (0, 0).
/// Throws ConfigError for out-of-bounds cells or a count mismatch.
EnvState reset(const GridSpec& spec, std::size_t n_uavs, std::span<const Cell> initial = {});

/// Moves one UAV a cell in the compass direction; moves past the boundary
/// leave that axis unchanged. Dead UAVs do not move.
EnvState apply_action(const EnvState& state, std::size_t uav_index, Action action,
                      const GridSpec& spec);

std::vector<Uav> uavs_of(const EnvState& state, const GridSpec& spec);

NetworkSnapshot evaluate_state(const EnvState& state, const World& world, const GridSpec& spec);

/// Percentile with linear interpolation between closest ranks
/// (position q * (n - 1) in the sorted sample).
double percentile(std::span<const double> values, double q);

double mean_of(std::span<const double> values);

/// alpha * mean + (1 - alpha) * p75, in the units of `rates`.
/// Throws DomainError on an empty sample.
double reward(std::span<const double> rates, const RewardWeights& weights);

/// Shared reward for a snapshot, after applying the world's reward scale.
double snapshot_reward(const NetworkSnapshot& snapshot, const World& world);

/// Applies every UAV's action simultaneously from `state`, re-evaluates the
/// network and returns the shared reward. `done` is set once the iteration
/// counter reaches the world's limit.
StepOutcome step(const EnvState& state, std::span<const Action> joint_action, const World& world,
                 const GridSpec& spec);

/// Marks a UAV dead. Already-dead UAVs are left alone and a warning is logged.
EnvState inject_failure(const EnvState& state, std::size_t uav_index);

}  // namespace iabplace
