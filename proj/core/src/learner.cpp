#include "iabplace/agent/learner.hpp"

#include <string>

#include "iabplace/errors.hpp"

namespace iabplace {

std::string_view to_string(LearnerKind k) {
    return k == LearnerKind::Tabular ? "tabular" : "d3qn";
}

LearnerKind learner_kind_from_string(std::string_view s) {
    if (s == "tabular") return LearnerKind::Tabular;
    if (s == "d3qn") return LearnerKind::D3qn;
    throw ConfigError("learner must be 'tabular' or 'd3qn', got '" + std::string(s) + "'");
}

TabularLearner::TabularLearner(std::size_t uav_index, const GridSpec& spec, double mu, double gamma)
    : uav_(uav_index), table_(spec), mu_(mu), gamma_(gamma) {}

ActionValues TabularLearner::action_values(const EnvState& state) const {
    return table_.row(state.cells.at(uav_));
}

void TabularLearner::observe(const EnvState& state, Action action, double reward,
                             const EnvState& next_state, bool /*done*/) {
    q_update(table_, state.cells.at(uav_), action, reward, next_state.cells.at(uav_), mu_, gamma_);
}

std::unique_ptr<Learner> TabularLearner::clone() const {
    return std::make_unique<TabularLearner>(*this);
}

std::vector<double> joint_observation(const EnvState& state, const GridSpec& spec) {
    std::vector<double> obs;
    obs.reserve(3 * state.cells.size());
    const double sx = static_cast<double>(spec.nx - 1);
    const double sy = static_cast<double>(spec.ny - 1);
    for (const Cell& c : state.cells) {
        obs.push_back(c.x / sx);
        obs.push_back(c.y / sy);
        obs.push_back(state.altitude_m / spec.altitude_m);
    }
    return obs;
}

D3qnLearner::D3qnLearner(std::size_t uav_index, std::size_t n_uavs, const GridSpec& spec,
                         NetShape widths, const TrainConfig& cfg, std::uint64_t seed)
    : uav_(uav_index), spec_(spec), cfg_(cfg), buffer_(cfg.buffer_capacity),
      rng_(make_rng(seed, 0)) {
    widths.input = 3 * n_uavs;
    Rng init = make_rng(seed, 1);
    nets_ = make_net_pair(widths, init);
}

ActionValues D3qnLearner::action_values(const EnvState& state) const {
    return nets_.online.forward(joint_observation(state, spec_));
}

void D3qnLearner::observe(const EnvState& state, Action action, double reward,
                          const EnvState& next_state, bool done) {
    buffer_.push({joint_observation(state, spec_), action, reward,
                  joint_observation(next_state, spec_), done});
    if (auto loss = train_step(nets_, buffer_, cfg_, rng_)) {
        last_loss_ = loss;
        if (nets_.train_steps % cfg_.target_sync_period == 0) sync_target(nets_);
    }
}

std::unique_ptr<Learner> D3qnLearner::clone() const {
    return std::make_unique<D3qnLearner>(*this);
}

}  // namespace iabplace
