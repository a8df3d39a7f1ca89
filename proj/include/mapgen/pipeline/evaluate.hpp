#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mapgen/measures.hpp"
#include "mapgen/nca.hpp"
#include "mapgen/pipeline/config.hpp"
#include "mapgen/pipeline/objectives.hpp"

namespace mapgen::pipeline {

/// Reference data needed by the corpus-relative measures. Immutable once built.
class MeasureContext {
public:
    /// corpus_dir empty: bundled corpus. wl_map empty: first corpus map.
    MeasureContext(const std::string& corpus_dir, const std::string& wl_map, int wl_iterations);
    explicit MeasureContext(const ExperimentConfig& config)
        : MeasureContext(config.reference_corpus, config.wl_reference_map, config.wl_iterations) {}

    /// One of measure_names(). Throws std::invalid_argument for an unknown name.
    double compute(const std::string& name, const GridMap& map) const;
    std::vector<double> compute(const std::vector<std::string>& names, const GridMap& map) const;

    const measures::TilePatternDistribution& tile_reference() const { return tile_reference_; }

private:
    measures::TilePatternDistribution tile_reference_;
    measures::WlHistogram wl_reference_;
    int wl_iterations_;
};

struct EvalRecord {
    std::uint64_t map_id = 0;
    GridMap raw{1, 1};
    GridMap map{1, 1};
    std::vector<double> measures;
    ObjectiveResult result;
    /// Value drawn on heatmaps: mean runtime, mean success rate (RSR objectives), similarity,
    /// or the signed gap in two-algorithm mode.
    double plot_value = 0.0;
};

/// generate -> repair -> measures -> objective. Thread-safe; deterministic per (genome, map_id)
/// except for measured runtimes.
class Evaluator {
public:
    explicit Evaluator(const ExperimentConfig& config);

    EvalRecord evaluate(const std::vector<double>& theta, std::uint64_t map_id) const;
    /// Objective part only, on an already repaired map.
    ObjectiveResult objective(const GridMap& raw, const GridMap& map, std::uint64_t map_id) const;
    std::vector<double> measure(const GridMap& map) const;

    const ExperimentConfig& config() const { return config_; }
    const MeasureContext& context() const { return context_; }

private:
    ExperimentConfig config_;
    MeasureContext context_;
    std::vector<std::string> axis_names_;
};

/// Record fields persisted in the evaluation log and archive payloads. Runtimes of rule-based
/// runs are left out so that RSR-mode artifacts are reproducible byte for byte.
nlohmann::json to_json(const ObjectiveResult& result, const ExperimentConfig& config);

std::vector<std::string> map_rows(const GridMap& map);
GridMap map_from_rows(const std::vector<std::string>& rows);

}  // namespace mapgen::pipeline
