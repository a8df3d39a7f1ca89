#include "mapgen/pipeline/validation.hpp"

#include <cstdio>

#include "mapgen/pipeline/objectives.hpp"
#include "mapgen/rng.hpp"

namespace mapgen::pipeline {

ValidationReport validate_map(const GridMap& map, Algorithm algorithm, const ValidationSettings& settings) {
    if (!is_valid(map)) throw MapError("validation requires a valid map");
    if (settings.n_runs < 1) throw ConfigError("validation needs at least one run");
    ExperimentConfig cfg;
    cfg.n_agents = settings.n_agents;
    cfg.time_limit = settings.time_limit;
    cfg.max_makespan = settings.max_makespan;
    cfg.eecbs_w = settings.eecbs_w;
    cfg.bucket = settings.bucket;

    ValidationReport rep;
    rep.algorithm = algorithm;
    rep.runs = settings.n_runs;
    double sr = 0.0, runtime = 0.0;
    int solved = 0;
    for (int k = 0; k < settings.n_runs; ++k) {
        const MapfInstance inst = generate_instance(map, settings.n_agents, derive_seed(settings.seed, 0, static_cast<std::uint64_t>(k)), settings.bucket);
        const RunRecord r = run_algorithm(algorithm, inst, cfg);
        sr += r.success_rate;
        if (r.status == SolveStatus::Solved) {
            ++solved;
            runtime += r.runtime;
        } else if (r.status == SolveStatus::NoSolution) {
            ++rep.no_solution;
        } else {
            ++rep.timeouts;
        }
    }
    rep.success_rate = sr / settings.n_runs;
    rep.instance_success_rate = static_cast<double>(solved) / settings.n_runs;
    rep.mean_runtime = solved > 0 ? runtime / solved : 0.0;
    return rep;
}

std::string validation_csv_header() { return "algorithm,runs,success_rate,instance_success_rate,mean_runtime,no_solution,timeouts"; }

std::string to_csv_row(const ValidationReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%d,%.6f,%.6f,%.6f,%d,%d", to_string(r.algorithm).c_str(), r.runs, r.success_rate,
                  r.instance_success_rate, r.mean_runtime, r.no_solution, r.timeouts);
    return buf;
}

}  // namespace mapgen::pipeline
