#pragma once

// Per-UAV learners. Each UAV owns one learner and controls only its own
// action; all of them are trained on the same shared reward.

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "iabplace/agent/dueling_net.hpp"
#include "iabplace/agent/epsilon.hpp"
#include "iabplace/agent/q_table.hpp"
#include "iabplace/agent/replay_buffer.hpp"
#include "iabplace/environment.hpp"
#include "iabplace/rng.hpp"

namespace iabplace {

enum class LearnerKind { Tabular, D3qn };

std::string_view to_string(LearnerKind k);
LearnerKind learner_kind_from_string(std::string_view s);

class Learner {
public:
    virtual ~Learner() = default;

    virtual LearnerKind kind() const = 0;
    virtual std::size_t uav_index() const = 0;

    /// Action values for this learner's UAV in `state`.
    virtual ActionValues action_values(const EnvState& state) const = 0;

    /// Consumes one transition of this UAV (learning happens here).
    virtual void observe(const EnvState& state, Action action, double reward,
                         const EnvState& next_state, bool done) = 0;

    virtual std::unique_ptr<Learner> clone() const = 0;
};

/// Q-learning over the UAV's own cell.
class TabularLearner final : public Learner {
public:
    TabularLearner(std::size_t uav_index, const GridSpec& spec, double mu, double gamma);

    LearnerKind kind() const override { return LearnerKind::Tabular; }
    std::size_t uav_index() const override { return uav_; }
    ActionValues action_values(const EnvState& state) const override;
    void observe(const EnvState& state, Action action, double reward, const EnvState& next_state,
                 bool done) override;
    std::unique_ptr<Learner> clone() const override;

    const QTable& table() const { return table_; }
    QTable& table() { return table_; }

private:
    std::size_t uav_;
    QTable table_;
    double mu_;
    double gamma_;
};

/// Normalised joint observation: (x / x_cells, y / y_cells, z / h) for every
/// UAV, 3 values each, all in [0, 1].
std::vector<double> joint_observation(const EnvState& state, const GridSpec& spec);

/// Dueling double DQN with uniform experience replay.
class D3qnLearner final : public Learner {
public:
    D3qnLearner(std::size_t uav_index, std::size_t n_uavs, const GridSpec& spec, NetShape widths,
                const TrainConfig& cfg, std::uint64_t seed);

    LearnerKind kind() const override { return LearnerKind::D3qn; }
    std::size_t uav_index() const override { return uav_; }
    ActionValues action_values(const EnvState& state) const override;
    void observe(const EnvState& state, Action action, double reward, const EnvState& next_state,
                 bool done) override;
    std::unique_ptr<Learner> clone() const override;

    const NetPair& nets() const { return nets_; }
    NetPair& nets() { return nets_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    const TrainConfig& config() const { return cfg_; }
    std::optional<double> last_loss() const { return last_loss_; }

private:
    std::size_t uav_;
    GridSpec spec_;
    TrainConfig cfg_;
    NetPair nets_;
    ReplayBuffer buffer_;
    Rng rng_;
    std::optional<double> last_loss_;
};

}  // namespace iabplace
