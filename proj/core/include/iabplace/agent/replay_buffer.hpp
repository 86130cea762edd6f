#pragma once

#include <cstddef>
#include <vector>

#include "iabplace/environment.hpp"
#include "iabplace/rng.hpp"

namespace iabplace {

struct Transition {
    std::vector<double> obs;
    Action action = Action::Hover;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool done = false;
};

/// Fixed-capacity ring of transitions; the oldest entry is overwritten once
/// full.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool can_sample(std::size_t batch) const { return batch > 0 && items_.size() >= batch; }

    /// `batch` distinct slot indices, uniformly at random. Throws DomainError
    /// when the buffer holds fewer than `batch` items.
    std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

    const Transition& operator[](std::size_t slot) const { return items_[slot]; }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> items_;
};

}  // namespace iabplace
