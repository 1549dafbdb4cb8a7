#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "beliefmarket/equilibrium.hpp"
#include "beliefmarket/message_passing.hpp"
#include "beliefmarket/oracle.hpp"

using namespace beliefmarket;

namespace {

std::vector<double> random_simplex(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> w(static_cast<std::size_t>(n));
    double total = 0;
    for (auto& v : w) { v = u(rng); total += v; }
    for (auto& v : w) v /= total;
    return w;
}

std::vector<Agent> exp_population(std::mt19937& rng, const OutcomeSpace& space, int n) {
    std::vector<Agent> agents;
    for (int i = 0; i < n; ++i) {
        agents.push_back(Agent::full_joint(
            "a" + std::to_string(i), 1.0, UtilityKind::ExponentialNegative,
            Belief::full(space, random_simplex(rng, static_cast<int>(space.num_joint_states())))));
    }
    return agents;
}

OutcomeSpace binary_chain(int n) {
    std::vector<Variable> vars;
    for (int i = 1; i <= n; ++i) vars.push_back({"y" + std::to_string(i), 2});
    return OutcomeSpace(std::move(vars));
}

} // namespace

static void BM_SolveExpMarket(benchmark::State& state) {
    const int goods = static_cast<int>(state.range(0));
    std::mt19937 rng(1);
    auto space = OutcomeSpace({{"y", goods}});
    auto agents = exp_population(rng, space, 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_exp_market(agents));
    }
    state.SetComplexityN(goods);
}
BENCHMARK(BM_SolveExpMarket)->RangeMultiplier(4)->Range(4, 1024)->Complexity();

static void BM_Tatonnement(benchmark::State& state) {
    const int goods = static_cast<int>(state.range(0));
    std::mt19937 rng(2);
    auto space = OutcomeSpace({{"y", goods}});
    std::vector<Agent> agents;
    for (int i = 0; i < 4; ++i) {
        agents.push_back(Agent::full_joint(
            "a" + std::to_string(i), 1.0,
            i % 2 == 0 ? UtilityKind::Logarithmic : UtilityKind::ExponentialNegative,
            Belief::full(space, random_simplex(rng, goods))));
    }
    TatonnementParams params;
    params.tolerance = 1e-8;
    PriceVector uniform(static_cast<std::size_t>(goods), 1.0 / goods);
    for (auto _ : state) {
        auto report = tatonnement(agents, space, uniform, params);
        benchmark::DoNotOptimize(report.prices.data());
    }
}
BENCHMARK(BM_Tatonnement)->Arg(2)->Arg(4)->Arg(8);

static void BM_MessagePassingSweep(benchmark::State& state) {
    const int vars = static_cast<int>(state.range(0));
    std::mt19937 rng(3);
    auto space = binary_chain(vars);
    std::vector<Agent> agents;
    for (int i = 0; i + 1 < vars; ++i) {
        agents.push_back(Agent::marginal("p" + std::to_string(i), 1.0,
                                         Belief::over(Clique({i, i + 1}), space,
                                                      random_simplex(rng, 4))));
    }
    RestrictedMarket market(space, agents);
    Schedule one_sweep;
    one_sweep.max_sweeps = 1;
    for (auto _ : state) {
        auto report = run_message_passing(market, one_sweep);
        benchmark::DoNotOptimize(report.prices.data());
    }
    state.SetComplexityN(vars);
}
// The space constructor refuses >= 64 binary variables (joint count overflows
// 64 bits), which bounds restricted markets too.
BENCHMARK(BM_MessagePassingSweep)->RangeMultiplier(2)->Range(4, 32)->Complexity();

static void BM_EnumerateJoint(benchmark::State& state) {
    const int vars = static_cast<int>(state.range(0));
    auto space = binary_chain(vars);
    for (auto _ : state) {
        benchmark::DoNotOptimize(enumerate_joint(space).data());
    }
}
BENCHMARK(BM_EnumerateJoint)->Arg(8)->Arg(12)->Arg(16);

// A clique agent's message cost depends on its clique, not the space: the
// per-variable times should be flat across space sizes.
static void BM_ComputeMessageLocality(benchmark::State& state) {
    const int vars = static_cast<int>(state.range(0));
    std::mt19937 rng(4);
    auto space = binary_chain(vars);
    auto agent = Agent::marginal("m", 1.0,
                                 Belief::over(Clique({0, 1}), space, random_simplex(rng, 4)));
    std::vector<double> positions(static_cast<std::size_t>(vars), 0.1);
    std::vector<double> prices(static_cast<std::size_t>(vars), 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_message(agent, 0, positions, prices, space));
    }
}
BENCHMARK(BM_ComputeMessageLocality)->Arg(2)->Arg(8)->Arg(32)->Arg(63);

static void BM_BruteForceJointProduct(benchmark::State& state) {
    const int vars = static_cast<int>(state.range(0));
    std::mt19937 rng(5);
    auto space = binary_chain(vars);
    std::vector<FactorTable> factors;
    for (int i = 0; i + 1 < vars; ++i) {
        std::vector<double> values{0.5, 1.0, 1.5, 2.0};
        factors.emplace_back(Clique({i, i + 1}), space, values);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(brute_force_joint_product(space, std::nullopt, factors));
    }
}
BENCHMARK(BM_BruteForceJointProduct)->Arg(4)->Arg(8)->Arg(12);

BENCHMARK_MAIN();
