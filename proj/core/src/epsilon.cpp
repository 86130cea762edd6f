#include "iabplace/agent/epsilon.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "iabplace/errors.hpp"

namespace iabplace {

void EpsilonSchedule::validate() const {
    if (!(eps_max >= 0.0 && eps_max <= 1.0)) throw ConfigError("eps_max must lie in [0, 1]");
    if (!(eps_min >= 0.0 && eps_min <= eps_max)) throw ConfigError("eps_min must lie in [0, eps_max]");
    if (!(eps_delta > 0.0)) throw ConfigError("eps_delta must be positive");
    if (!(current >= eps_min && current <= eps_max)) {
        throw ConfigError("epsilon must stay within [eps_min, eps_max]");
    }
}

EpsilonSchedule decay(const EpsilonSchedule& schedule) {
    EpsilonSchedule next = schedule;
    next.current = std::max(schedule.eps_min, schedule.current - schedule.eps_delta);
    return next;
}

Action greedy_action(std::span<const double> values, Rng& rng) {
    if (values.size() != kActionCount) throw DomainError("expected one value per action");
    for (double v : values) {
        if (!std::isfinite(v)) throw DomainError("non-finite action value (diverged learner?)");
    }
    const double best = *std::max_element(values.begin(), values.end());
    std::array<std::size_t, kActionCount> ties{};
    std::size_t n = 0;
    for (std::size_t a = 0; a < values.size(); ++a) {
        if (values[a] == best) ties[n++] = a;
    }
    const std::size_t pick = n == 1 ? ties[0] : ties[uniform_index(rng, n)];
    return static_cast<Action>(pick);
}

Action select_action(std::span<const double> values, const EpsilonSchedule& schedule, Rng& rng) {
    if (uniform01(rng) < schedule.current) {
        return static_cast<Action>(uniform_index(rng, kActionCount));
    }
    return greedy_action(values, rng);
}

}  // namespace iabplace
