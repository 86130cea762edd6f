#pragma once

// Dueling Q-network with a two-layer fully connected trunk, separate value
// and advantage heads, and a hand-written backward pass. Parameters live in
// one flat vector so that SGD, target sync, checkpoints and finite
// differences all operate on the same storage.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iabplace/agent/replay_buffer.hpp"
#include "iabplace/environment.hpp"
#include "iabplace/rng.hpp"

namespace iabplace {

struct NetShape {
    std::size_t input = 0;
    std::size_t trunk1 = 128;
    std::size_t trunk2 = 128;
    std::size_t head = 64;  // hidden width of each head

    friend bool operator==(const NetShape&, const NetShape&) = default;
};

struct LayerInfo {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;  // 1 for bias vectors
    std::size_t offset = 0;
};

using ActionValues = std::array<double, kActionCount>;

class DuelingNet {
public:
    DuelingNet() = default;
    /// Zero parameters; see `initialize`.
    explicit DuelingNet(const NetShape& shape);

    /// Glorot-uniform weights, zero biases.
    void initialize(Rng& rng);

    const NetShape& shape() const { return shape_; }
    const std::vector<LayerInfo>& layers() const { return layers_; }
    std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }

    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }

    /// Q(s, .) = V(s) + A(s, .) - mean_a A(s, a). Throws DomainError on a
    /// length mismatch.
    ActionValues forward(std::span<const double> obs) const;

    /// Column-batched forward: obs is input x B, result is 5 x B.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& obs) const;

    /// Separate heads for one observation; used by tests of the combine rule.
    double state_value(std::span<const double> obs) const;
    ActionValues advantages(std::span<const double> obs) const;

    /// Mean squared error between Q(obs_b, action_b) and target_b over the
    /// batch, and its gradient with respect to every parameter.
    double loss_and_gradient(const Eigen::MatrixXd& obs, std::span<const std::size_t> actions,
                             std::span<const double> targets, Eigen::VectorXd& grad) const;

    double loss(const Eigen::MatrixXd& obs, std::span<const std::size_t> actions,
                std::span<const double> targets) const;

    friend bool operator==(const DuelingNet& a, const DuelingNet& b) {
        return a.shape_ == b.shape_ && a.params_ == b.params_;
    }

private:
    struct Activations;
    void run(const Eigen::MatrixXd& obs, Activations& act) const;

    NetShape shape_;
    std::vector<LayerInfo> layers_;
    Eigen::VectorXd params_;
};

struct TrainConfig {
    double mu = 0.01;
    double gamma = 0.9;
    std::size_t batch_size = 32;
    std::size_t buffer_capacity = 10000;
    std::size_t target_sync_period = 100;
    std::optional<double> grad_clip;  // max gradient L2 norm

    void validate() const;
};

struct NetPair {
    DuelingNet online;
    DuelingNet target;
    std::size_t train_steps = 0;
};

/// Both nets share the same initial parameters.
NetPair make_net_pair(const NetShape& shape, Rng& rng);

/// r if done, otherwise r + gamma * Q_target(s', argmax_a Q_online(s', a)).
double double_q_target(double r, std::span<const double> next_obs, bool done,
                       const DuelingNet& online, const DuelingNet& target, double gamma);

/// One SGD step of size mu on the online net from a uniform minibatch.
/// Returns the batch loss, or nullopt (and leaves everything untouched)
/// when the buffer holds fewer than batch_size transitions.
std::optional<double> train_step(NetPair& nets, const ReplayBuffer& buffer, const TrainConfig& cfg,
                                 Rng& rng);

/// target <- online
void sync_target(NetPair& nets);

}  // namespace iabplace
