#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mapgen/pipeline/config.hpp"
#include "mapgen/qd/archive.hpp"

namespace mapgen::pipeline {

struct BatchReport {
    int batch = 0;
    int evaluations = 0;  // completed so far
    double qd_score = 0.0;
    std::size_t cells = 0;
    double batch_best_objective = 0.0;
    double batch_best_plot_value = 0.0;  // plot value of the best candidate of this batch
};

struct RunOptions {
    std::string out_dir;  // artifacts; empty keeps everything in memory
    int workers = 1;
    bool resume = false;
    std::function<void(const BatchReport&)> on_batch;
};

struct RunResult {
    qd::Archive archive;
    std::vector<BatchReport> batches;
    int evaluations = 0;
    bool resumed = false;
};

/// Batch-synchronous CMA-MAE loop. Each batch is evaluated on `workers` OpenMP threads and
/// applied to the archive in sample order, so worker count never changes the result.
/// With out_dir set, writes archive.jsonl, evaluations.jsonl, heatmap.csv and heatmap.svg, and
/// a checkpoint after every batch that `resume` continues from.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options);

}  // namespace mapgen::pipeline
