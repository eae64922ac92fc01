#include "kgnls/birkhoff.hpp"
#include "kgnls/divisors.hpp"
#include "kgnls/hamiltonian.hpp"
#include "kgnls/torus_lab.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace kgnls;

namespace {

const std::vector<int> kJ{1, 2, 3};

FourierState random_state(int M, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> n(0.0, 0.1);
    FourierState s(M);
    for (int j = -M; j <= M; ++j) {
        s.z_at(j) = {n(g), n(g)};
        s.zbar_at(j) = std::conj(s.z_at(j));
    }
    return s;
}

void BM_build_P(benchmark::State& st) {
    const int M = static_cast<int>(st.range(0));
    FrequencyTable f(10.0, M);
    for (auto _ : st) benchmark::DoNotOptimize(build_P(f, M));
}
BENCHMARK(BM_build_P)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_poisson_bracket(benchmark::State& st) {
    const int M = static_cast<int>(st.range(0));
    FrequencyTable f(10.0, M);
    const PolyHamiltonian P = build_P(f, M);
    const NormalFormResult nf = solve_cohomological_quartic(P, f, kJ);
    for (auto _ : st) benchmark::DoNotOptimize(poisson_bracket(P, nf.G));
}
BENCHMARK(BM_poisson_bracket)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_kg_rhs(benchmark::State& st) {
    const int M = static_cast<int>(st.range(0));
    const TruncatedSystem sys = TruncatedSystem::kg(10.0, M);
    const FourierState s = random_state(M, 1);
    for (auto _ : st) benchmark::DoNotOptimize(kg_rhs(sys, s));
}
BENCHMARK(BM_kg_rhs)->RangeMultiplier(2)->Range(8, 128);

void BM_measure_sweep(benchmark::State& st) {
    const FrequencyModel m = build_model(10.0, kJ, 8, 3.0);
    const std::vector<int> k{1, -2, 1};
    std::vector<IndexPair> pairs;
    for (const auto& e : enumerate_ell(k, kJ, m.M)) pairs.push_back(make_index_pair(k, e, kJ, 10.0));
    ResonantQuery q;
    q.samples = 10000;
    q.workers = static_cast<int>(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(measure_sweep(m, pairs, {0.1, 0.3, 1.0}, q));
}
BENCHMARK(BM_measure_sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
