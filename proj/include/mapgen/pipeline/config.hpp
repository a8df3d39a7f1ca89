#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mapgen/instance.hpp"
#include "mapgen/nca.hpp"
#include "mapgen/qd/archive.hpp"
#include "mapgen/qd/emitter.hpp"

namespace mapgen::pipeline {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Algorithm { Cbs, Eecbs, Pbs, Pibt };
enum class ObjectiveKind { Runtime, NegRsr, Similarity, RuntimeGap, RsrGap };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& text);
std::string to_string(ObjectiveKind k);
ObjectiveKind parse_objective(const std::string& text);

/// Search-based and priority-based solvers report runtimes; the rule-based one reports RSR.
bool is_rule_based(Algorithm a);

/// Measure names understood by the pipeline, in canonical order.
const std::vector<std::string>& measure_names();

struct ExperimentConfig {
    std::string name = "experiment";
    std::uint64_t seed = 0;

    int width = 32;
    int height = 32;
    int min_obstacles = 307;
    int max_obstacles = 717;

    ObjectiveKind objective = ObjectiveKind::Runtime;
    std::vector<Algorithm> algorithms{Algorithm::Cbs};

    int n_agents = 50;
    int n_instances = 5;
    double time_limit = 20.0;
    int max_makespan = 1000;
    double eecbs_w = 1.5;
    double rsr_c = 0.0;  // 0 means n_agents * max_makespan + 1000
    BucketOptions bucket;

    std::array<qd::MeasureAxis, 2> axes{{{"n_obstacles", 307, 717, 100}, {"kl_tile", 0, 10, 100}}};
    std::string reference_corpus;  // empty: bundled corpus
    std::string wl_reference_map;  // empty: first map of the corpus
    int wl_iterations = 3;

    NcaArchitecture nca;

    int n_evals = 10000;
    double alpha = 0.01;
    double min_f = 0.0;  // filled in by load_config when not given
    qd::EmitterConfig emitter;

    /// The document the config was loaded from, echoed into run metadata.
    nlohmann::json source;

    double effective_rsr_c() const;
};

/// Parses and validates. Throws ConfigError with a readable message.
ExperimentConfig load_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);
/// Fully resolved configuration (every default made explicit).
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace mapgen::pipeline
