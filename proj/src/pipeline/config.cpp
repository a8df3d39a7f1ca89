#include "mapgen/pipeline/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace mapgen::pipeline {

using nlohmann::json;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Cbs: return "cbs";
        case Algorithm::Eecbs: return "eecbs";
        case Algorithm::Pbs: return "pbs";
        case Algorithm::Pibt: return "pibt";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& text) {
    if (text == "cbs") return Algorithm::Cbs;
    if (text == "eecbs") return Algorithm::Eecbs;
    if (text == "pbs") return Algorithm::Pbs;
    if (text == "pibt") return Algorithm::Pibt;
    throw ConfigError("unknown algorithm '" + text + "' (expected cbs, eecbs, pbs or pibt)");
}

std::string to_string(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::Runtime: return "runtime";
        case ObjectiveKind::NegRsr: return "neg_rsr";
        case ObjectiveKind::Similarity: return "similarity";
        case ObjectiveKind::RuntimeGap: return "runtime_gap";
        case ObjectiveKind::RsrGap: return "rsr_gap";
    }
    return "?";
}

ObjectiveKind parse_objective(const std::string& text) {
    if (text == "runtime") return ObjectiveKind::Runtime;
    if (text == "neg_rsr") return ObjectiveKind::NegRsr;
    if (text == "similarity") return ObjectiveKind::Similarity;
    if (text == "runtime_gap") return ObjectiveKind::RuntimeGap;
    if (text == "rsr_gap") return ObjectiveKind::RsrGap;
    throw ConfigError("unknown objective '" + text + "'");
}

bool is_rule_based(Algorithm a) { return a == Algorithm::Pibt; }

const std::vector<std::string>& measure_names() {
    static const std::vector<std::string> names{"n_obstacles", "kl_tile", "tile_entropy", "bc_std", "lambda2", "wl_kl"};
    return names;
}

double ExperimentConfig::effective_rsr_c() const {
    return rsr_c > 0.0 ? rsr_c : static_cast<double>(n_agents) * max_makespan + 1000.0;
}

namespace {

void check_keys(const json& section, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!section.is_object()) throw ConfigError("'" + where + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : section.items()) {
        if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in '" + where + "'");
    }
}

template <typename T>
void read(const json& section, const char* key, T& out) {
    if (section.contains(key) && !section.at(key).is_null()) out = section.at(key).get<T>();
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

void validate(const ExperimentConfig& c) {
    require(c.width >= 3 && c.height >= 3, "map must be at least 3x3");
    require(c.min_obstacles >= 0 && c.min_obstacles <= c.max_obstacles, "obstacle range must satisfy 0 <= lo <= hi");
    require(c.max_obstacles <= c.width * c.height - 1, "obstacle upper bound must leave an Empty tile");
    require(c.n_instances >= 1, "instances per evaluation must be >= 1");
    require(c.n_evals >= 1, "evaluation count must be >= 1");
    require(c.n_agents >= 1, "agent count must be >= 1");
    require(c.time_limit > 0.0, "time limit must be positive");
    require(c.max_makespan >= 1, "max makespan must be >= 1");
    require(c.eecbs_w >= 1.0, "EECBS suboptimality must be >= 1");
    require(c.wl_iterations >= 0, "WL iterations must be >= 0");
    require(2 * c.n_agents <= c.width * c.height - c.max_obstacles,
            "too many agents for the smallest allowed number of Empty tiles");
    require(c.emitter.batch_size >= 2, "batch size must be >= 2");
    require(c.emitter.sigma0 > 0.0, "sigma0 must be positive");
    require(c.emitter.restart_patience >= 1, "restart patience must be >= 1");
    require(c.alpha >= 0.0 && c.alpha <= 1.0, "archive learning rate must be in [0, 1]");
    for (const auto& a : c.axes) {
        const auto& names = measure_names();
        require(std::find(names.begin(), names.end(), a.name) != names.end(), "unknown measure '" + a.name + "'");
        require(a.upper > a.lower, "measure '" + a.name + "' has an empty range");
        require(a.bins >= 1, "measure '" + a.name + "' needs at least one bin");
    }
    try {
        c.nca.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    const auto n_algos = c.algorithms.size();
    switch (c.objective) {
        case ObjectiveKind::Runtime:
            require(n_algos == 1 && !is_rule_based(c.algorithms[0]), "runtime objective needs one of cbs, eecbs, pbs");
            break;
        case ObjectiveKind::NegRsr:
            require(n_algos == 1 && is_rule_based(c.algorithms[0]), "neg_rsr objective needs pibt");
            break;
        case ObjectiveKind::Similarity:
            require(n_algos <= 1, "similarity objective takes at most one algorithm");
            break;
        case ObjectiveKind::RuntimeGap:
            require(n_algos == 2 && !is_rule_based(c.algorithms[0]) && !is_rule_based(c.algorithms[1]),
                    "runtime_gap needs two of cbs, eecbs, pbs");
            break;
        case ObjectiveKind::RsrGap:
            require(n_algos == 2 && is_rule_based(c.algorithms[0]) && is_rule_based(c.algorithms[1]),
                    "rsr_gap needs two rule-based algorithms");
            break;
    }
    const bool uses_rsr = std::any_of(c.algorithms.begin(), c.algorithms.end(), is_rule_based);
    if (uses_rsr) {
        // Every full-success RSR must beat every partial one: C - SoC > 1 with SoC <= N_a * M.
        require(c.effective_rsr_c() >= static_cast<double>(c.n_agents) * c.max_makespan + 1.0,
                "rsr_c must be at least n_agents * max_makespan + 1");
    }
}

double default_min_f(const ExperimentConfig& c) {
    return c.objective == ObjectiveKind::NegRsr ? -c.effective_rsr_c() : 0.0;
}

}  // namespace

ExperimentConfig load_config(const json& doc) {
    ExperimentConfig c;
    bool min_f_given = false;
    try {
        check_keys(doc, "config", {"name", "seed", "map", "objective", "mapf", "measures", "reference", "nca", "qd"});
        read(doc, "name", c.name);
        read(doc, "seed", c.seed);
        if (doc.contains("map")) {
            const json& m = doc.at("map");
            check_keys(m, "map", {"width", "height", "obstacles"});
            read(m, "width", c.width);
            read(m, "height", c.height);
            if (m.contains("obstacles")) {
                const auto range = m.at("obstacles").get<std::vector<int>>();
                require(range.size() == 2, "map.obstacles must be [lo, hi]");
                c.min_obstacles = range[0];
                c.max_obstacles = range[1];
            }
        }
        if (doc.contains("objective")) {
            const json& o = doc.at("objective");
            check_keys(o, "objective", {"kind", "algorithms", "rsr_c"});
            if (o.contains("kind")) c.objective = parse_objective(o.at("kind").get<std::string>());
            if (o.contains("algorithms")) {
                c.algorithms.clear();
                for (const auto& a : o.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
            }
            read(o, "rsr_c", c.rsr_c);
        }
        if (doc.contains("mapf")) {
            const json& m = doc.at("mapf");
            check_keys(m, "mapf", {"agents", "instances", "time_limit", "max_makespan", "eecbs_w", "min_distance", "bucket_width"});
            read(m, "agents", c.n_agents);
            read(m, "instances", c.n_instances);
            read(m, "time_limit", c.time_limit);
            read(m, "max_makespan", c.max_makespan);
            read(m, "eecbs_w", c.eecbs_w);
            read(m, "min_distance", c.bucket.min_distance);
            read(m, "bucket_width", c.bucket.bucket_width);
        }
        if (doc.contains("measures")) {
            const json& ms = doc.at("measures");
            require(ms.is_array() && ms.size() == 2, "'measures' must list exactly two axes");
            for (std::size_t k = 0; k < 2; ++k) {
                check_keys(ms[k], "measures", {"name", "lower", "upper", "bins"});
                auto& axis = c.axes[k];
                read(ms[k], "name", axis.name);
                read(ms[k], "lower", axis.lower);
                read(ms[k], "upper", axis.upper);
                read(ms[k], "bins", axis.bins);
            }
        }
        if (doc.contains("reference")) {
            const json& r = doc.at("reference");
            check_keys(r, "reference", {"corpus", "wl_map", "wl_iterations"});
            read(r, "corpus", c.reference_corpus);
            read(r, "wl_map", c.wl_reference_map);
            read(r, "wl_iterations", c.wl_iterations);
        }
        if (doc.contains("nca")) {
            const json& n = doc.at("nca");
            check_keys(n, "nca", {"state_channels", "hidden_channels", "steps", "seed"});
            read(n, "state_channels", c.nca.state_channels);
            read(n, "hidden_channels", c.nca.hidden_channels);
            read(n, "steps", c.nca.steps);
            if (n.contains("seed")) c.nca.seed = parse_nca_seed(n.at("seed").get<std::string>());
        }
        if (doc.contains("qd")) {
            const json& q = doc.at("qd");
            check_keys(q, "qd", {"evaluations", "batch_size", "alpha", "sigma0", "restart_patience", "min_f"});
            read(q, "evaluations", c.n_evals);
            read(q, "batch_size", c.emitter.batch_size);
            read(q, "alpha", c.alpha);
            read(q, "sigma0", c.emitter.sigma0);
            read(q, "restart_patience", c.emitter.restart_patience);
            if (q.contains("min_f") && !q.at("min_f").is_null()) {
                c.min_f = q.at("min_f").get<double>();
                min_f_given = true;
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    validate(c);
    if (!min_f_given) c.min_f = default_min_f(c);
    c.source = doc;
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return load_config(doc);
}

json to_json(const ExperimentConfig& c) {
    json algos = json::array();
    for (auto a : c.algorithms) algos.push_back(to_string(a));
    json axes = json::array();
    for (const auto& a : c.axes) axes.push_back({{"name", a.name}, {"lower", a.lower}, {"upper", a.upper}, {"bins", a.bins}});
    return {
        {"name", c.name},
        {"seed", c.seed},
        {"map", {{"width", c.width}, {"height", c.height}, {"obstacles", {c.min_obstacles, c.max_obstacles}}}},
        {"objective", {{"kind", to_string(c.objective)}, {"algorithms", algos}, {"rsr_c", c.effective_rsr_c()}}},
        {"mapf",
         {{"agents", c.n_agents},
          {"instances", c.n_instances},
          {"time_limit", c.time_limit},
          {"max_makespan", c.max_makespan},
          {"eecbs_w", c.eecbs_w},
          {"min_distance", c.bucket.min_distance},
          {"bucket_width", c.bucket.bucket_width}}},
        {"measures", axes},
        {"reference", {{"corpus", c.reference_corpus}, {"wl_map", c.wl_reference_map}, {"wl_iterations", c.wl_iterations}}},
        {"nca",
         {{"state_channels", c.nca.state_channels},
          {"hidden_channels", c.nca.hidden_channels},
          {"steps", c.nca.steps},
          {"seed", to_string(c.nca.seed)}}},
        {"qd",
         {{"evaluations", c.n_evals},
          {"batch_size", c.emitter.batch_size},
          {"alpha", c.alpha},
          {"sigma0", c.emitter.sigma0},
          {"restart_patience", c.emitter.restart_patience},
          {"min_f", c.min_f}}},
    };
}

}  // namespace mapgen::pipeline
