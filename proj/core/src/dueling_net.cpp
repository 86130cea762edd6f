#include "iabplace/agent/dueling_net.hpp"

#include <cmath>

#include "iabplace/errors.hpp"

namespace iabplace {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstMap = Eigen::Map<const MatrixXd>;
using MutMap = Eigen::Map<MatrixXd>;

enum Layer : std::size_t {
    kTrunk1W, kTrunk1B, kTrunk2W, kTrunk2B,
    kValue1W, kValue1B, kValue2W, kValue2B,
    kAdv1W, kAdv1B, kAdv2W, kAdv2B,
    kLayerCount
};

MatrixXd relu(const MatrixXd& z) { return z.cwiseMax(0.0); }

MatrixXd relu_grad(const MatrixXd& upstream, const MatrixXd& z) {
    return upstream.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
}

std::size_t argmax_first(const Eigen::Ref<const VectorXd>& v) {
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v(i) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
    }
    return best;
}

}  // namespace

struct DuelingNet::Activations {
    MatrixXd x, z1, h1, z2, h2, zv, hv, v, za, ha, a, q;
};

DuelingNet::DuelingNet(const NetShape& shape) : shape_(shape) {
    if (shape.input == 0 || shape.trunk1 == 0 || shape.trunk2 == 0 || shape.head == 0) {
        throw ConfigError("network layer widths must be positive");
    }
    const std::size_t a = kActionCount;
    const std::array<std::pair<const char*, std::pair<std::size_t, std::size_t>>, kLayerCount> spec{{
        {"trunk1.weight", {shape.trunk1, shape.input}},
        {"trunk1.bias", {shape.trunk1, 1}},
        {"trunk2.weight", {shape.trunk2, shape.trunk1}},
        {"trunk2.bias", {shape.trunk2, 1}},
        {"value1.weight", {shape.head, shape.trunk2}},
        {"value1.bias", {shape.head, 1}},
        {"value2.weight", {1, shape.head}},
        {"value2.bias", {1, 1}},
        {"advantage1.weight", {shape.head, shape.trunk2}},
        {"advantage1.bias", {shape.head, 1}},
        {"advantage2.weight", {a, shape.head}},
        {"advantage2.bias", {a, 1}},
    }};
    std::size_t offset = 0;
    for (const auto& [name, dims] : spec) {
        layers_.push_back({name, dims.first, dims.second, offset});
        offset += dims.first * dims.second;
    }
    params_ = VectorXd::Zero(static_cast<Eigen::Index>(offset));
}

void DuelingNet::initialize(Rng& rng) {
    for (const LayerInfo& l : layers_) {
        if (l.cols == 1) continue;  // biases stay zero
        const double bound = std::sqrt(6.0 / static_cast<double>(l.rows + l.cols));
        for (std::size_t k = 0; k < l.rows * l.cols; ++k) {
            params_(static_cast<Eigen::Index>(l.offset + k)) = uniform_real(rng, -bound, bound);
        }
    }
}

void DuelingNet::run(const MatrixXd& obs, Activations& act) const {
    if (static_cast<std::size_t>(obs.rows()) != shape_.input) {
        throw DomainError("observation has " + std::to_string(obs.rows()) + " values, network expects " +
                          std::to_string(shape_.input));
    }
    const auto m = [&](Layer id) {
        const LayerInfo& l = layers_[id];
        return ConstMap(params_.data() + l.offset, static_cast<Eigen::Index>(l.rows),
                        static_cast<Eigen::Index>(l.cols));
    };
    act.x = obs;
    act.z1 = (m(kTrunk1W) * obs).colwise() + m(kTrunk1B).col(0);
    act.h1 = relu(act.z1);
    act.z2 = (m(kTrunk2W) * act.h1).colwise() + m(kTrunk2B).col(0);
    act.h2 = relu(act.z2);
    act.zv = (m(kValue1W) * act.h2).colwise() + m(kValue1B).col(0);
    act.hv = relu(act.zv);
    act.v = ((m(kValue2W) * act.hv).array() + m(kValue2B)(0, 0)).matrix();
    act.za = (m(kAdv1W) * act.h2).colwise() + m(kAdv1B).col(0);
    act.ha = relu(act.za);
    act.a = (m(kAdv2W) * act.ha).colwise() + m(kAdv2B).col(0);
    const Eigen::RowVectorXd a_mean = act.a.colwise().mean();
    act.q = act.a;
    act.q.rowwise() += act.v.row(0) - a_mean;
}

MatrixXd DuelingNet::forward_batch(const MatrixXd& obs) const {
    Activations act;
    run(obs, act);
    return act.q;
}

ActionValues DuelingNet::forward(std::span<const double> obs) const {
    const MatrixXd x = Eigen::Map<const VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
    const MatrixXd q = forward_batch(x);
    ActionValues out{};
    for (std::size_t i = 0; i < kActionCount; ++i) out[i] = q(static_cast<Eigen::Index>(i), 0);
    return out;
}

double DuelingNet::state_value(std::span<const double> obs) const {
    Activations act;
    run(Eigen::Map<const VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size())), act);
    return act.v(0, 0);
}

ActionValues DuelingNet::advantages(std::span<const double> obs) const {
    Activations act;
    run(Eigen::Map<const VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size())), act);
    ActionValues out{};
    for (std::size_t i = 0; i < kActionCount; ++i) out[i] = act.a(static_cast<Eigen::Index>(i), 0);
    return out;
}

double DuelingNet::loss(const MatrixXd& obs, std::span<const std::size_t> actions,
                        std::span<const double> targets) const {
    const MatrixXd q = forward_batch(obs);
    double sum = 0.0;
    for (Eigen::Index b = 0; b < q.cols(); ++b) {
        const double e = q(static_cast<Eigen::Index>(actions[b]), b) - targets[b];
        sum += e * e;
    }
    return sum / static_cast<double>(q.cols());
}

double DuelingNet::loss_and_gradient(const MatrixXd& obs, std::span<const std::size_t> actions,
                                     std::span<const double> targets, VectorXd& grad) const {
    const auto batch = obs.cols();
    if (static_cast<std::size_t>(batch) != actions.size() || actions.size() != targets.size()) {
        throw DomainError("batch, action and target counts differ");
    }
    Activations act;
    run(obs, act);

    const double inv_b = 1.0 / static_cast<double>(batch);
    MatrixXd dq = MatrixXd::Zero(static_cast<Eigen::Index>(kActionCount), batch);
    double sum = 0.0;
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto a = static_cast<Eigen::Index>(actions[b]);
        const double e = act.q(a, b) - targets[b];
        sum += e * e;
        dq(a, b) = 2.0 * e * inv_b;
    }

    grad.setZero(params_.size());
    const auto m = [&](Layer id) {
        const LayerInfo& l = layers_[id];
        return ConstMap(params_.data() + l.offset, static_cast<Eigen::Index>(l.rows),
                        static_cast<Eigen::Index>(l.cols));
    };
    const auto g = [&](Layer id) {
        const LayerInfo& l = layers_[id];
        return MutMap(grad.data() + l.offset, static_cast<Eigen::Index>(l.rows),
                      static_cast<Eigen::Index>(l.cols));
    };

    // Q = V + A - mean(A): dV = sum_k dQ_k, dA_j = dQ_j - dV / |A|.
    const MatrixXd dv = dq.colwise().sum();
    MatrixXd da = dq;
    da.rowwise() -= dv.row(0) / static_cast<double>(kActionCount);

    g(kValue2W) = dv * act.hv.transpose();
    g(kValue2B)(0, 0) = dv.sum();
    const MatrixXd dzv = relu_grad(m(kValue2W).transpose() * dv, act.zv);
    g(kValue1W) = dzv * act.h2.transpose();
    g(kValue1B) = dzv.rowwise().sum();

    g(kAdv2W) = da * act.ha.transpose();
    g(kAdv2B) = da.rowwise().sum();
    const MatrixXd dza = relu_grad(m(kAdv2W).transpose() * da, act.za);
    g(kAdv1W) = dza * act.h2.transpose();
    g(kAdv1B) = dza.rowwise().sum();

    const MatrixXd dh2 = m(kValue1W).transpose() * dzv + m(kAdv1W).transpose() * dza;
    const MatrixXd dz2 = relu_grad(dh2, act.z2);
    g(kTrunk2W) = dz2 * act.h1.transpose();
    g(kTrunk2B) = dz2.rowwise().sum();
    const MatrixXd dz1 = relu_grad(m(kTrunk2W).transpose() * dz2, act.z1);
    g(kTrunk1W) = dz1 * act.x.transpose();
    g(kTrunk1B) = dz1.rowwise().sum();

    return sum * inv_b;
}

void TrainConfig::validate() const {
    if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("mu must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (buffer_capacity < batch_size) throw ConfigError("buffer_capacity must be >= batch_size");
    if (target_sync_period == 0) throw ConfigError("target_sync_period must be positive");
    if (grad_clip && !(*grad_clip > 0.0)) throw ConfigError("grad_clip must be positive");
}

NetPair make_net_pair(const NetShape& shape, Rng& rng) {
    NetPair pair{DuelingNet(shape), DuelingNet(shape), 0};
    pair.online.initialize(rng);
    pair.target = pair.online;
    return pair;
}

double double_q_target(double r, std::span<const double> next_obs, bool done,
                       const DuelingNet& online, const DuelingNet& target, double gamma) {
    if (done) return r;
    const ActionValues q_online = online.forward(next_obs);
    const ActionValues q_target = target.forward(next_obs);
    std::size_t best = 0;
    for (std::size_t a = 1; a < kActionCount; ++a) {
        if (q_online[a] > q_online[best]) best = a;
    }
    return r + gamma * q_target[best];
}

std::optional<double> train_step(NetPair& nets, const ReplayBuffer& buffer, const TrainConfig& cfg,
                                 Rng& rng) {
    if (!buffer.can_sample(cfg.batch_size)) return std::nullopt;
    const auto slots = buffer.sample_indices(cfg.batch_size, rng);
    const auto in = static_cast<Eigen::Index>(nets.online.shape().input);
    const auto batch = static_cast<Eigen::Index>(slots.size());

    MatrixXd obs(in, batch);
    MatrixXd next(in, batch);
    std::vector<std::size_t> actions(slots.size());
    for (Eigen::Index b = 0; b < batch; ++b) {
        const Transition& t = buffer[slots[static_cast<std::size_t>(b)]];
        if (static_cast<Eigen::Index>(t.obs.size()) != in || static_cast<Eigen::Index>(t.next_obs.size()) != in) {
            throw DomainError("stored observation does not match the network input");
        }
        obs.col(b) = Eigen::Map<const VectorXd>(t.obs.data(), in);
        next.col(b) = Eigen::Map<const VectorXd>(t.next_obs.data(), in);
        actions[static_cast<std::size_t>(b)] = static_cast<std::size_t>(t.action);
    }

    const MatrixXd q_online_next = nets.online.forward_batch(next);
    const MatrixXd q_target_next = nets.target.forward_batch(next);
    std::vector<double> targets(slots.size());
    for (Eigen::Index b = 0; b < batch; ++b) {
        const Transition& t = buffer[slots[static_cast<std::size_t>(b)]];
        if (t.done) {
            targets[static_cast<std::size_t>(b)] = t.reward;
            continue;
        }
        const auto best = static_cast<Eigen::Index>(argmax_first(q_online_next.col(b)));
        targets[static_cast<std::size_t>(b)] = t.reward + cfg.gamma * q_target_next(best, b);
    }

    VectorXd grad;
    const double loss = nets.online.loss_and_gradient(obs, actions, targets, grad);
    if (cfg.grad_clip) {
        const double norm = grad.norm();
        if (norm > *cfg.grad_clip) grad *= *cfg.grad_clip / norm;
    }
    nets.online.parameters() -= cfg.mu * grad;
    ++nets.train_steps;
    return loss;
}

void sync_target(NetPair& nets) {
    if (!(nets.online.shape() == nets.target.shape())) {
        throw DomainError("online and target networks differ in shape");
    }
    nets.target.parameters() = nets.online.parameters();
}

}  // namespace iabplace
