#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mapgen/measures.hpp"
#include "mapgen/nca.hpp"
#include "mapgen/repair.hpp"
#include "mapgen/solvers.hpp"

using namespace mapgen;

namespace {

NcaGenome random_genome(std::uint64_t seed) {
    const NcaArchitecture arch;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.2);
    std::vector<double> theta(static_cast<std::size_t>(param_count(arch)));
    for (double& v : theta) v = normal(rng);
    return NcaGenome(arch, theta);
}

GridMap random_map(int size, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution obstacle(p);
    GridMap raw(size, size);
    for (int i = 0; i < raw.size(); ++i) raw.set(i, obstacle(rng) ? Tile::Obstacle : Tile::Empty);
    const int cells = size * size;
    return repair(raw, cells * 3 / 10, cells * 7 / 10);
}

void BM_NcaSerial(benchmark::State& state) {
    const NcaGenome g = random_genome(1);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(generate(g, n, n));
}

void BM_NcaParallel(benchmark::State& state) {
    const NcaGenome g = random_genome(1);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(generate_parallel(g, n, n, static_cast<int>(state.range(1))));
}

void BM_BetweennessSerial(benchmark::State& state) {
    const GridMap m = random_map(static_cast<int>(state.range(0)), 0.4, 2);
    for (auto _ : state) benchmark::DoNotOptimize(measures::betweenness_usage(m));
}

void BM_BetweennessParallel(benchmark::State& state) {
    const GridMap m = random_map(static_cast<int>(state.range(0)), 0.4, 2);
    for (auto _ : state) benchmark::DoNotOptimize(measures::betweenness_usage_parallel(m, static_cast<int>(state.range(1))));
}

void BM_Lambda2(benchmark::State& state) {
    const GridMap m = random_map(static_cast<int>(state.range(0)), 0.4, 3);
    for (auto _ : state) benchmark::DoNotOptimize(measures::lambda2(m));
}

void BM_Repair(benchmark::State& state) {
    std::mt19937_64 rng(4);
    std::bernoulli_distribution obstacle(static_cast<double>(state.range(0)) / 100.0);
    GridMap raw(32, 32);
    for (int i = 0; i < raw.size(); ++i) raw.set(i, obstacle(rng) ? Tile::Obstacle : Tile::Empty);
    for (auto _ : state) benchmark::DoNotOptimize(repair(raw, 307, 717));
}

void BM_Pibt(benchmark::State& state) {
    const GridMap m = random_map(32, 0.3, 5);
    const MapfInstance inst = generate_instance(m, static_cast<int>(state.range(0)), 6);
    for (auto _ : state) benchmark::DoNotOptimize(solve_pibt(inst, 1000));
}

void BM_Eecbs(benchmark::State& state) {
    const GridMap m = random_map(32, 0.3, 5);
    const MapfInstance inst = generate_instance(m, static_cast<int>(state.range(0)), 7);
    for (auto _ : state) benchmark::DoNotOptimize(solve_cbs(inst, 1.5, 20.0));
}

}  // namespace

BENCHMARK(BM_NcaSerial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NcaParallel)->Args({16, 1})->Args({32, 1})->Args({32, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BetweennessSerial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BetweennessParallel)->Args({32, 1})->Args({32, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Lambda2)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Repair)->Arg(5)->Arg(50)->Arg(95)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Pibt)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Eecbs)->Arg(30)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
