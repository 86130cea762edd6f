#include <benchmark/benchmark.h>

#include <vector>

#include "iabplace/agent/dueling_net.hpp"
#include "iabplace/agent/replay_buffer.hpp"
#include "iabplace/rng.hpp"
#include "iabplace/scenarios.hpp"
#include "iabplace/topology.hpp"

using namespace iabplace;

namespace {

std::vector<Uav> random_uavs(std::size_t n, Rng& rng) {
    std::vector<Uav> u;
    for (std::size_t i = 0; i < n; ++i) {
        u.push_back({i, {uniform_real(rng, 0, 1000), uniform_real(rng, 0, 1000), 100.0}, true});
    }
    return u;
}

std::vector<UserTerminal> random_users(std::size_t n, Rng& rng) {
    std::vector<UserTerminal> users;
    for (std::size_t m = 0; m < n; ++m) {
        users.push_back({m, {uniform_real(rng, 0, 1000), uniform_real(rng, 0, 1000), 0.0}});
    }
    return users;
}

void BM_FormBackhaul(benchmark::State& state) {
    Rng rng = make_rng(1, 0);
    const auto uavs = random_uavs(static_cast<std::size_t>(state.range(0)), rng);
    RadioParams p;
    const GroundStation bs{{0, 0, 10}};
    for (auto _ : state) benchmark::DoNotOptimize(form_backhaul(bs, uavs, p));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FormBackhaul)->RangeMultiplier(2)->Range(2, 64)->Complexity(benchmark::oNSquared);

void BM_EvaluateNetwork(benchmark::State& state) {
    Rng rng = make_rng(2, 0);
    const auto uavs = random_uavs(static_cast<std::size_t>(state.range(1)), rng);
    const auto users = random_users(static_cast<std::size_t>(state.range(0)), rng);
    RadioParams p;
    const GroundStation bs{{0, 0, 10}};
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_network(bs, uavs, users, p));
}
BENCHMARK(BM_EvaluateNetwork)->Args({100, 2})->Args({100, 8})->Args({1000, 8});

void BM_DuelingForward(benchmark::State& state) {
    Rng rng = make_rng(3, 0);
    DuelingNet net({6, 128, 128, 64});
    net.initialize(rng);
    const std::vector<double> obs{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    for (auto _ : state) benchmark::DoNotOptimize(net.forward(obs));
}
BENCHMARK(BM_DuelingForward);

void BM_TrainStep(benchmark::State& state) {
    Rng rng = make_rng(4, 0);
    NetPair nets = make_net_pair({6, 128, 128, 64}, rng);
    ReplayBuffer buf(1000);
    for (int k = 0; k < 1000; ++k) {
        std::vector<double> s(6), n(6);
        for (double& x : s) x = uniform01(rng);
        for (double& x : n) x = uniform01(rng);
        buf.push({s, static_cast<Action>(k % 5), uniform01(rng), n, false});
    }
    TrainConfig cfg;
    cfg.batch_size = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(train_step(nets, buf, cfg, rng));
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(128);

void BM_TabularEpisode(benchmark::State& state) {
    ExperimentConfig cfg;
    cfg.episodes = 1;
    for (auto _ : state) benchmark::DoNotOptimize(run_training(cfg).record.final_reward);
}
BENCHMARK(BM_TabularEpisode)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
