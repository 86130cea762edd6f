#include "iabplace/agent/replay_buffer.hpp"

#include <algorithm>
#include <cmath>

#include "iabplace/errors.hpp"

namespace iabplace {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("buffer_capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
    if (!std::isfinite(t.reward)) throw DomainError("transition reward is not finite");
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
    if (!can_sample(batch)) {
        throw DomainError("replay buffer holds " + std::to_string(items_.size()) +
                          " transitions, batch needs " + std::to_string(batch));
    }
    // Floyd's algorithm: a uniform subset in O(batch) draws.
    const std::size_t n = items_.size();
    std::vector<std::size_t> picked;
    picked.reserve(batch);
    for (std::size_t j = n - batch; j < n; ++j) {
        const auto t = static_cast<std::size_t>(uniform_index(rng, j + 1));
        if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
            picked.push_back(t);
        } else {
            picked.push_back(j);
        }
    }
    return picked;
}

}  // namespace iabplace
