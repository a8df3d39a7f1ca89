#pragma once

#include <cstdint>
#include <string>

#include "mapgen/grid_map.hpp"
#include "mapgen/instance.hpp"
#include "mapgen/pipeline/config.hpp"

namespace mapgen::pipeline {

struct ValidationSettings {
    int n_agents = 50;
    int n_runs = 200;
    double time_limit = 20.0;
    int max_makespan = 1000;
    double eecbs_w = 1.5;
    std::uint64_t seed = 0;
    BucketOptions bucket;
};

struct ValidationReport {
    Algorithm algorithm = Algorithm::Cbs;
    int runs = 0;
    /// Search solvers: fraction of runs solved. PIBT: mean fraction of agents at their goals.
    double success_rate = 0.0;
    /// Fraction of runs in which every agent succeeded.
    double instance_success_rate = 0.0;
    double mean_runtime = 0.0;  // over successful runs; 0 if none
    int no_solution = 0;
    int timeouts = 0;
};

/// Runs n_runs fresh bucket instances (seed derive_seed(seed, 0, k)) and summarizes them.
ValidationReport validate_map(const GridMap& map, Algorithm algorithm, const ValidationSettings& settings);

std::string to_csv_row(const ValidationReport& report);
std::string validation_csv_header();

}  // namespace mapgen::pipeline
