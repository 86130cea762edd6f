#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "doctest.h"
#include "iabplace/agent/checkpoint.hpp"
#include "iabplace/agent/dueling_net.hpp"
#include "iabplace/agent/epsilon.hpp"
#include "iabplace/agent/learner.hpp"
#include "iabplace/agent/q_table.hpp"
#include "iabplace/agent/replay_buffer.hpp"
#include "iabplace/errors.hpp"
#include "iabplace/rng.hpp"

using namespace iabplace;

namespace {

std::vector<double> random_obs(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform01(rng);
    return v;
}

// Independent forward pass straight from the parameter layout.
ActionValues reference_forward(const DuelingNet& net, std::span<const double> obs) {
    const auto& p = net.parameters();
    auto find = [&](const std::string& name) -> const LayerInfo& {
        for (const auto& l : net.layers()) {
            if (l.name == name) return l;
        }
        throw std::runtime_error("missing layer " + name);
    };
    auto dense = [&](const std::string& w, const std::string& b, const std::vector<double>& x,
                     bool relu) {
        const LayerInfo& lw = find(w);
        const LayerInfo& lb = find(b);
        std::vector<double> y(lw.rows);
        for (std::size_t r = 0; r < lw.rows; ++r) {
            double acc = p[static_cast<Eigen::Index>(lb.offset + r)];
            for (std::size_t c = 0; c < lw.cols; ++c) {
                // column-major storage, as Eigen maps it
                acc += p[static_cast<Eigen::Index>(lw.offset + c * lw.rows + r)] * x[c];
            }
            y[r] = relu ? std::max(acc, 0.0) : acc;
        }
        return y;
    };
    std::vector<double> x(obs.begin(), obs.end());
    const auto h1 = dense("trunk1.weight", "trunk1.bias", x, true);
    const auto h2 = dense("trunk2.weight", "trunk2.bias", h1, true);
    const auto v = dense("value2.weight", "value2.bias", dense("value1.weight", "value1.bias", h2, true), false);
    const auto a = dense("advantage2.weight", "advantage2.bias", dense("advantage1.weight", "advantage1.bias", h2, true), false);
    double mean = 0.0;
    for (double q : a) mean += q / a.size();
    ActionValues out{};
    for (std::size_t k = 0; k < kActionCount; ++k) out[k] = v[0] + a[k] - mean;
    return out;
}

}  // namespace

TEST_CASE("greedy selection") {
    Rng rng = make_rng(1, 0);
    EpsilonSchedule s{0.99, 0.0, 0.01, 0.0};
    const std::array<double, 5> v{1, 5, 2, 0, 0};
    CHECK(select_action(v, s, rng) == Action::East);
}

TEST_CASE("uniform exploration passes a chi-square test") {
    Rng rng = make_rng(2, 0);
    EpsilonSchedule s{1.0, 0.01, 0.01, 1.0};
    const std::array<double, 5> v{1, 5, 2, 0, 0};
    std::array<int, 5> counts{};
    const int n = 10000;
    for (int k = 0; k < n; ++k) ++counts[static_cast<std::size_t>(select_action(v, s, rng))];
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - n / 5.0) * (c - n / 5.0) / (n / 5.0);
    CHECK(chi2 < 13.277);  // 0.99 quantile, 4 degrees of freedom
}

TEST_CASE("mixed exploration picks the argmax 60 percent of the time") {
    Rng rng = make_rng(3, 0);
    EpsilonSchedule s{0.5, 0.01, 0.01, 0.5};
    const std::array<double, 5> v{1, 5, 2, 0, 0};
    int hits = 0;
    const int n = 10000;
    for (int k = 0; k < n; ++k) hits += select_action(v, s, rng) == Action::East;
    const double sd = std::sqrt(0.6 * 0.4 / n);
    CHECK(std::abs(hits / double(n) - 0.6) < 4 * sd);
}

TEST_CASE("shifting every value leaves the greedy choice alone") {
    Rng a = make_rng(4, 0);
    Rng b = make_rng(4, 0);
    const std::array<double, 5> v{3, 1, 3, 0, 2};
    std::array<double, 5> w = v;
    for (double& x : w) x += 123.5;
    for (int k = 0; k < 1000; ++k) CHECK(greedy_action(v, a) == greedy_action(w, b));
}

TEST_CASE("greedy ties are broken uniformly") {
    Rng rng = make_rng(5, 0);
    const std::array<double, 5> v{3, 1, 3, 0, 3};
    std::array<int, 5> counts{};
    for (int k = 0; k < 9000; ++k) ++counts[static_cast<std::size_t>(greedy_action(v, rng))];
    CHECK(counts[1] == 0);
    CHECK(counts[3] == 0);
    for (std::size_t i : {0u, 2u, 4u}) CHECK(std::abs(counts[i] - 3000) < 200);
}

TEST_CASE("non-finite action values are rejected") {
    Rng rng = make_rng(6, 0);
    const std::array<double, 5> v{1, NAN, 0, 0, 0};
    CHECK_THROWS_AS(greedy_action(v, rng), DomainError);
}

TEST_CASE("epsilon decay") {
    auto s = EpsilonSchedule::starting_at_max(0.99, 0.01, 0.01);
    CHECK(decay(s).current == doctest::Approx(0.98));
    CHECK(decay({0.99, 0.01, 0.01, 0.015}).current == 0.01);
    for (int k = 0; k < 200; ++k) s = decay(s);
    CHECK(s.current == 0.01);
}

TEST_CASE("q update") {
    GridSpec g{4, 4, 10.0, 30.0};
    QTable t(g);
    CHECK(t.state_count() == 16);
    const Cell s{1, 1};
    const Cell n{2, 1};
    t.at(n, Action::West) = 2.0;
    q_update(t, s, Action::East, 1.0, n, 0.5, 0.9);
    CHECK(t.at(s, Action::East) == doctest::Approx(1.4));

    t.at(s, Action::North) = 9.0;
    q_update(t, s, Action::North, 3.0, n, 1.0, 0.0);
    CHECK(t.at(s, Action::North) == 3.0);

    const QTable before = t;
    q_update(t, s, Action::South, 3.0, n, 0.0, 0.9);
    CHECK(t == before);
}

TEST_CASE("replay buffer ring and uniform sampling") {
    ReplayBuffer buf(1000);
    for (int k = 0; k < 1500; ++k) buf.push({{double(k)}, Action::Hover, double(k), {0.0}, false});
    CHECK(buf.size() == 1000);
    double lo = 1e9;
    for (std::size_t i = 0; i < buf.size(); ++i) lo = std::min(lo, buf[i].reward);
    CHECK(lo == 500.0);

    Rng rng = make_rng(7, 0);
    std::vector<int> hits(1000, 0);
    for (int k = 0; k < 100000 / 20; ++k) {
        const auto idx = buf.sample_indices(20, rng);
        std::vector<std::size_t> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
        for (std::size_t i : idx) ++hits[i];
    }
    const double p = 1.0 / 1000;
    const double sd = std::sqrt(100000 * p * (1 - p));
    for (int h : hits) CHECK(std::abs(h - 100.0) < 4 * sd + 1e-9);
    CHECK_FALSE(ReplayBuffer(10).can_sample(1));
}

TEST_CASE("dueling combine rule") {
    Rng rng = make_rng(8, 0);
    DuelingNet net({4, 8, 8, 6});
    net.initialize(rng);
    const auto obs = random_obs(rng, 4);
    const auto q = net.forward(obs);
    double mean = 0.0;
    for (double v : q) mean += v / kActionCount;
    CHECK(std::abs(mean - net.state_value(obs)) < 1e-9);

    const auto ref = reference_forward(net, obs);
    for (std::size_t k = 0; k < kActionCount; ++k) CHECK(q[k] == doctest::Approx(ref[k]).epsilon(1e-12));

    // A constant advantage head (zero weights, equal biases) collapses Q to V.
    for (const auto& l : net.layers()) {
        if (l.name == "advantage2.weight") {
            net.parameters().segment(static_cast<Eigen::Index>(l.offset),
                                     static_cast<Eigen::Index>(l.rows * l.cols)).setZero();
        }
        if (l.name == "advantage2.bias") {
            net.parameters().segment(static_cast<Eigen::Index>(l.offset), 5).setConstant(2.5);
        }
    }
    const double v = net.state_value(obs);
    for (double x : net.forward(obs)) CHECK(x == doctest::Approx(v).epsilon(1e-12));

    const std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS(net.forward(wrong), DomainError);
}

TEST_CASE("gradient matches central differences") {
    Rng rng = make_rng(9, 0);
    DuelingNet net({3, 4, 4, 4});
    net.initialize(rng);
    // Zero biases put pre-activations exactly on the ReLU kink; move off it.
    for (Eigen::Index i = 0; i < net.parameters().size(); ++i) {
        net.parameters()[i] += uniform_real(rng, -0.1, 0.1);
    }
    const Eigen::Index batch = 6;
    Eigen::MatrixXd obs(3, batch);
    for (Eigen::Index c = 0; c < batch; ++c) {
        for (Eigen::Index r = 0; r < 3; ++r) obs(r, c) = uniform01(rng);
    }
    std::vector<std::size_t> actions;
    std::vector<double> targets;
    for (Eigen::Index c = 0; c < batch; ++c) {
        actions.push_back(uniform_index(rng, kActionCount));
        targets.push_back(uniform_real(rng, -1, 1));
    }
    Eigen::VectorXd grad;
    net.loss_and_gradient(obs, actions, targets, grad);
    REQUIRE(grad.size() == static_cast<Eigen::Index>(net.parameter_count()));
    double worst = 0.0;
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
        DuelingNet plus = net;
        DuelingNet minus = net;
        plus.parameters()[i] += h;
        minus.parameters()[i] -= h;
        const double fd = (plus.loss(obs, actions, targets) - minus.loss(obs, actions, targets)) / (2 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-7});
        worst = std::max(worst, std::abs(fd - grad[i]) / denom);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("double q target") {
    Rng rng = make_rng(10, 0);
    NetPair nets = make_net_pair({2, 5, 5, 3}, rng);
    nets.online.initialize(rng);
    const std::vector<double> next{0.3, 0.7};
    CHECK(double_q_target(1.5, next, true, nets.online, nets.target, 0.9) == 1.5);

    const auto qo = nets.online.forward(next);
    const auto qt = nets.target.forward(next);
    const std::size_t best = static_cast<std::size_t>(std::max_element(qo.begin(), qo.end()) - qo.begin());
    const double y = double_q_target(1.5, next, false, nets.online, nets.target, 0.9);
    CHECK(y == doctest::Approx(1.5 + 0.9 * qt[best]));
    CHECK(y <= 1.5 + 0.9 * *std::max_element(qt.begin(), qt.end()) + 1e-12);

    const double same = double_q_target(1.5, next, false, nets.target, nets.target, 0.9);
    CHECK(same == doctest::Approx(1.5 + 0.9 * *std::max_element(qt.begin(), qt.end())));
}

TEST_CASE("train step and target sync") {
    Rng rng = make_rng(11, 0);
    NetPair nets = make_net_pair({2, 6, 6, 4}, rng);
    const DuelingNet init_target = nets.target;
    TrainConfig cfg;
    cfg.batch_size = 4;
    ReplayBuffer buf(16);
    CHECK_FALSE(train_step(nets, buf, cfg, rng).has_value());

    for (int k = 0; k < 16; ++k) {
        buf.push({random_obs(rng, 2), static_cast<Action>(k % 5), uniform01(rng), random_obs(rng, 2), k % 3 == 0});
    }
    const auto loss = train_step(nets, buf, cfg, rng);
    REQUIRE(loss.has_value());
    CHECK(*loss >= 0.0);
    CHECK(nets.target == init_target);
    CHECK_FALSE(nets.online == init_target);

    sync_target(nets);
    CHECK(nets.target == nets.online);
    const DuelingNet once = nets.target;
    sync_target(nets);
    CHECK(nets.target == once);
    for (int k = 0; k < 20; ++k) {
        const auto x = random_obs(rng, 2);
        CHECK(nets.online.forward(x) == nets.target.forward(x));
    }
}

TEST_CASE("zero error means zero gradient") {
    Rng rng = make_rng(12, 0);
    DuelingNet net({2, 5, 5, 3});
    net.initialize(rng);
    Eigen::MatrixXd obs(2, 3);
    obs << 0.1, 0.5, 0.9, 0.2, 0.4, 0.8;
    std::vector<std::size_t> actions{0, 2, 4};
    std::vector<double> targets;
    for (Eigen::Index c = 0; c < 3; ++c) {
        const std::vector<double> x{obs(0, c), obs(1, c)};
        targets.push_back(net.forward(x)[actions[static_cast<std::size_t>(c)]]);
    }
    Eigen::VectorXd grad;
    CHECK(net.loss_and_gradient(obs, actions, targets, grad) == doctest::Approx(0.0));
    CHECK(grad.norm() < 1e-12);
}

TEST_CASE("training is deterministic for a fixed seed") {
    GridSpec g{4, 4, 10.0, 30.0};
    TrainConfig cfg;
    cfg.batch_size = 8;
    auto run = [&] {
        D3qnLearner l(0, 1, g, {0, 8, 8, 4}, cfg, 42);
        Rng rng = make_rng(1, 0);
        auto s = reset(g, 1);
        std::vector<double> losses;
        for (int k = 0; k < 60; ++k) {
            const auto a = static_cast<Action>(uniform_index(rng, kActionCount));
            const auto n = apply_action(s, 0, a, g);
            l.observe(s, a, uniform01(rng), n, false);
            if (l.last_loss()) losses.push_back(*l.last_loss());
            s = n;
        }
        return losses;
    };
    const auto a = run();
    CHECK_FALSE(a.empty());
    CHECK(a == run());
}

TEST_CASE("checkpoint round trip and mismatch rejection") {
    const auto dir = std::filesystem::temp_directory_path() / "iabplace_unit_ckpt";
    std::filesystem::create_directories(dir);
    GridSpec g{4, 4, 10.0, 30.0};
    TrainConfig cfg;

    std::vector<std::unique_ptr<Learner>> tab;
    tab.push_back(std::make_unique<TabularLearner>(0, g, 0.5, 0.9));
    auto& t = static_cast<TabularLearner&>(*tab[0]).table();
    t.at({1, 2}, Action::West) = 3.25;
    const CheckpointHeader header{"abcdef0123456789", {0.99, 0.01, 0.01, 0.42}};
    save_checkpoint(dir / "tab.json", header, tab);

    std::vector<std::unique_ptr<Learner>> tab2;
    tab2.push_back(std::make_unique<TabularLearner>(0, g, 0.5, 0.9));
    const auto back = load_checkpoint(dir / "tab.json", tab2);
    CHECK(back.config_hash == header.config_hash);
    CHECK(back.schedule.current == 0.42);
    CHECK(static_cast<TabularLearner&>(*tab2[0]).table() == t);

    std::vector<std::unique_ptr<Learner>> wrong_grid;
    wrong_grid.push_back(std::make_unique<TabularLearner>(0, GridSpec{5, 4, 10.0, 30.0}, 0.5, 0.9));
    CHECK_THROWS_AS(load_checkpoint(dir / "tab.json", wrong_grid), FormatError);

    std::vector<std::unique_ptr<Learner>> net;
    net.push_back(std::make_unique<D3qnLearner>(0, 2, g, NetShape{0, 8, 8, 4}, cfg, 1));
    save_checkpoint(dir / "net.json", header, net);
    std::vector<std::unique_ptr<Learner>> net2;
    net2.push_back(std::make_unique<D3qnLearner>(0, 2, g, NetShape{0, 8, 8, 4}, cfg, 2));
    load_checkpoint(dir / "net.json", net2);
    CHECK(static_cast<D3qnLearner&>(*net2[0]).nets().online ==
          static_cast<D3qnLearner&>(*net[0]).nets().online);

    std::vector<std::unique_ptr<Learner>> net3;
    net3.push_back(std::make_unique<D3qnLearner>(0, 2, g, NetShape{0, 8, 6, 4}, cfg, 2));
    CHECK_THROWS_AS(load_checkpoint(dir / "net.json", net3), FormatError);

    std::ofstream(dir / "junk.json") << "{not json";
    CHECK_THROWS_AS(load_checkpoint(dir / "junk.json", tab2), FormatError);
    std::filesystem::remove_all(dir);
}
