#include "mapgen/pipeline/objectives.hpp"

#include <cmath>

#include "mapgen/rng.hpp"

namespace mapgen::pipeline {

double rsr(double sr, long soc, double c) {
    if (sr < 0.0 || sr > 1.0) throw std::invalid_argument("success rate must be in [0, 1]");
    return sr < 1.0 ? sr : sr * c - static_cast<double>(soc);
}

void check_rsr_constant(double c, int n_agents, int max_makespan) {
    if (c < static_cast<double>(n_agents) * max_makespan + 1.0) {
        throw ConfigError("RSR constant " + std::to_string(c) + " must be at least n_agents * max_makespan + 1");
    }
}

RunRecord run_algorithm(Algorithm algorithm, const MapfInstance& instance, const ExperimentConfig& config) {
    RunRecord r;
    r.algorithm = algorithm;
    if (is_rule_based(algorithm)) {
        const PibtResult res = solve_pibt(instance, config.max_makespan);
        r.success_rate = res.success_rate;
        r.status = res.success_rate == 1.0 ? SolveStatus::Solved : SolveStatus::Timeout;
        r.sum_of_cost = res.sum_of_cost;
        r.makespan = res.makespan;
        r.runtime = res.cpu_runtime;
        r.rsr = rsr(res.success_rate, res.sum_of_cost, config.effective_rsr_c());
        return r;
    }
    Solution s;
    switch (algorithm) {
        case Algorithm::Cbs: s = solve_cbs(instance, 1.0, config.time_limit); break;
        case Algorithm::Eecbs: s = solve_cbs(instance, config.eecbs_w, config.time_limit); break;
        case Algorithm::Pbs: s = solve_pbs(instance, config.time_limit); break;
        case Algorithm::Pibt: break;
    }
    r.status = s.status;
    r.success_rate = s.status == SolveStatus::Solved ? 1.0 : 0.0;
    r.sum_of_cost = s.sum_of_cost;
    r.makespan = s.makespan;
    r.runtime = s.status == SolveStatus::Solved ? s.cpu_runtime : config.time_limit;
    return r;
}

std::vector<MapfInstance> evaluation_instances(const GridMap& map, const ExperimentConfig& config, std::uint64_t map_id) {
    std::vector<MapfInstance> out;
    for (int k = 0; k < config.n_instances; ++k) {
        out.push_back(generate_instance(map, config.n_agents, derive_seed(config.seed, map_id, static_cast<std::uint64_t>(k)), config.bucket));
    }
    return out;
}

namespace {

// Runs every algorithm on the same instances and records per-algorithm means.
ObjectiveResult run_all(const GridMap& map, const ExperimentConfig& config, std::uint64_t map_id) {
    if (!is_valid(map)) throw MapError("objective requires a valid map");
    const auto instances = evaluation_instances(map, config, map_id);
    ObjectiveResult res;
    for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
        const Algorithm algo = config.algorithms[a];
        double sum = 0.0, sr = 0.0;
        for (int k = 0; k < config.n_instances; ++k) {
            RunRecord r = run_algorithm(algo, instances[static_cast<std::size_t>(k)], config);
            r.instance = k;
            sum += is_rule_based(algo) ? r.rsr : r.runtime;
            sr += r.success_rate;
            if (a == 0 && r.status == SolveStatus::NoSolution) ++res.no_solution_count;
            res.runs.push_back(r);
        }
        res.raw_means.push_back(sum / config.n_instances);
        res.mean_success_rates.push_back(sr / config.n_instances);
    }
    return res;
}

}  // namespace

ObjectiveResult objective_runtime(const GridMap& map, const ExperimentConfig& config, std::uint64_t map_id) {
    if (config.algorithms.size() != 1 || is_rule_based(config.algorithms[0])) {
        throw ConfigError("runtime objective needs one search-based or priority-based algorithm");
    }
    ObjectiveResult res = run_all(map, config, map_id);
    res.objective = res.raw_means[0];
    return res;
}

ObjectiveResult objective_neg_rsr(const GridMap& map, const ExperimentConfig& config, std::uint64_t map_id) {
    if (config.algorithms.size() != 1 || !is_rule_based(config.algorithms[0])) {
        throw ConfigError("RSR objective needs a rule-based algorithm");
    }
    check_rsr_constant(config.effective_rsr_c(), config.n_agents, config.max_makespan);
    ObjectiveResult res = run_all(map, config, map_id);
    res.objective = -res.raw_means[0];
    return res;
}

ObjectiveResult objective_gap(const GridMap& map, const ExperimentConfig& config, std::uint64_t map_id) {
    if (config.algorithms.size() != 2 || is_rule_based(config.algorithms[0]) != is_rule_based(config.algorithms[1])) {
        throw ConfigError("gap objective needs two algorithms of the same family");
    }
    if (is_rule_based(config.algorithms[0])) check_rsr_constant(config.effective_rsr_c(), config.n_agents, config.max_makespan);
    ObjectiveResult res = run_all(map, config, map_id);
    res.signed_gap = res.raw_means[0] - res.raw_means[1];
    res.objective = std::abs(res.signed_gap);
    return res;
}

}  // namespace mapgen::pipeline
