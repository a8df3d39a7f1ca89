#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mapgen/grid_map.hpp"
#include "mapgen/pipeline/config.hpp"
#include "mapgen/solvers.hpp"

namespace mapgen::pipeline {

/// Regularized success rate: sr below full success, sr * c - soc at full success.
double rsr(double sr, long soc, double c);
/// Throws ConfigError unless c >= n_agents * max_makespan + 1, which makes every full-success
/// value exceed every partial one.
void check_rsr_constant(double c, int n_agents, int max_makespan);

/// One solver run on one instance.
struct RunRecord {
    Algorithm algorithm = Algorithm::Cbs;
    int instance = 0;
    SolveStatus status = SolveStatus::Solved;  // PIBT: Solved iff every agent reached its goal
    double runtime = 0.0;                      // objective runtime (time limit for failures)
    double success_rate = 0.0;
    long sum_of_cost = 0;
    int makespan = 0;
    double rsr = 0.0;
};

struct ObjectiveResult {
    double objective = 0.0;          // archive-facing value, maximized
    std::vector<double> raw_means;   // per algorithm: mean runtime or mean RSR (un-negated)
    std::vector<double> mean_success_rates;
    double signed_gap = 0.0;         // raw_means[0] - raw_means[1] in two-algorithm mode
    int no_solution_count = 0;       // PBS NoSolution outcomes of the first algorithm
    std::vector<RunRecord> runs;
};

/// Runs one algorithm on one instance and folds the outcome into a RunRecord.
RunRecord run_algorithm(Algorithm algorithm, const MapfInstance& instance, const ExperimentConfig& config);

/// Instances for evaluation `map_id`; instance k uses derive_seed(config.seed, map_id, k).
std::vector<MapfInstance> evaluation_instances(const GridMap& map, const ExperimentConfig& config, std::uint64_t map_id);

/// Mean runtime over the instances; failed runs count as the time limit.
ObjectiveResult objective_runtime(const GridMap& map, const ExperimentConfig& config, std::uint64_t map_id);
/// Negated mean RSR.
ObjectiveResult objective_neg_rsr(const GridMap& map, const ExperimentConfig& config, std::uint64_t map_id);
/// |mean_a - mean_b| on the same instances. RSR gaps use un-negated means.
ObjectiveResult objective_gap(const GridMap& map, const ExperimentConfig& config, std::uint64_t map_id);

}  // namespace mapgen::pipeline
