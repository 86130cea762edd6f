#pragma once

#include <span>

#include "iabplace/environment.hpp"
#include "iabplace/rng.hpp"

namespace iabplace {

struct EpsilonSchedule {
    double eps_max = 0.99;
    double eps_min = 0.01;
    double eps_delta = 0.01;
    double current = 0.99;

    static EpsilonSchedule starting_at_max(double eps_max, double eps_min, double eps_delta) {
        return {eps_max, eps_min, eps_delta, eps_max};
    }

    void validate() const;
};

/// current <- max(eps_min, current - eps_delta)
EpsilonSchedule decay(const EpsilonSchedule& schedule);

/// Explores with probability `schedule.current` (uniform action), otherwise
/// takes the argmax of `values` with ties broken uniformly at random.
Action select_action(std::span<const double> values, const EpsilonSchedule& schedule, Rng& rng);

/// Greedy choice only; ties broken uniformly at random.
Action greedy_action(std::span<const double> values, Rng& rng);

}  // namespace iabplace
