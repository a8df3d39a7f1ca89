#pragma once

#include <string>

#include "mapgen/pipeline/config.hpp"
#include "mapgen/qd/archive.hpp"

namespace mapgen::pipeline {

/// One row per occupied cell: bin_x,bin_y,measure_x,measure_y,objective,value,no_solution.
/// `value` is the payload's plot_value (signed in two-algorithm mode); `no_solution` is 1 when
/// any run of the elite's evaluation returned NoSolution.
std::string heatmap_csv(const qd::Archive& archive);

/// Standalone SVG heatmap of plot values with labeled axes. Cells flagged no_solution get an
/// orange outline.
std::string heatmap_svg(const qd::Archive& archive, const ExperimentConfig& config);

}  // namespace mapgen::pipeline
