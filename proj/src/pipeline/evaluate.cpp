#include "mapgen/pipeline/evaluate.hpp"

#include <stdexcept>

#include "mapgen/movingai.hpp"
#include "mapgen/repair.hpp"

namespace mapgen::pipeline {

MeasureContext::MeasureContext(const std::string& corpus_dir, const std::string& wl_map, int wl_iterations)
    : wl_iterations_(wl_iterations) {
    const auto corpus = corpus_dir.empty() ? measures::bundled_reference_corpus() : measures::load_corpus(corpus_dir);
    tile_reference_ = measures::build_reference(corpus);
    const GridMap wl_ref = wl_map.empty() ? corpus.front() : load_map_file(wl_map);
    wl_reference_ = measures::wl_histogram(wl_ref, wl_iterations_);
}

double MeasureContext::compute(const std::string& name, const GridMap& map) const {
    if (name == "n_obstacles") return measures::count_obstacles(map);
    if (name == "kl_tile") return measures::kl_tile_pattern(map, tile_reference_);
    if (name == "tile_entropy") return measures::tile_entropy(map);
    if (name == "bc_std") return measures::betweenness_std(map);
    if (name == "lambda2") return measures::lambda2(map);
    if (name == "wl_kl") {
        if (!is_valid(map)) throw MapError("WL features require a valid map");
        return measures::wl_kl(measures::wl_histogram(map, wl_iterations_), wl_reference_);
    }
    throw std::invalid_argument("unknown measure '" + name + "'");
}

std::vector<double> MeasureContext::compute(const std::vector<std::string>& names, const GridMap& map) const {
    std::vector<double> out;
    for (const auto& n : names) out.push_back(compute(n, map));
    return out;
}

Evaluator::Evaluator(const ExperimentConfig& config) : config_(config), context_(config) {
    for (const auto& a : config_.axes) axis_names_.push_back(a.name);
}

std::vector<double> Evaluator::measure(const GridMap& map) const { return context_.compute(axis_names_, map); }

ObjectiveResult Evaluator::objective(const GridMap& raw, const GridMap& map, std::uint64_t map_id) const {
    switch (config_.objective) {
        case ObjectiveKind::Runtime: return objective_runtime(map, config_, map_id);
        case ObjectiveKind::NegRsr: return objective_neg_rsr(map, config_, map_id);
        case ObjectiveKind::Similarity: {
            ObjectiveResult r;
            r.objective = similarity(raw, map);
            r.raw_means.push_back(r.objective);
            return r;
        }
        case ObjectiveKind::RuntimeGap:
        case ObjectiveKind::RsrGap: return objective_gap(map, config_, map_id);
    }
    throw std::logic_error("unhandled objective");
}

EvalRecord Evaluator::evaluate(const std::vector<double>& theta, std::uint64_t map_id) const {
    EvalRecord rec;
    rec.map_id = map_id;
    rec.raw = generate(NcaGenome(config_.nca, theta), config_.width, config_.height);
    rec.map = repair(rec.raw, config_.min_obstacles, config_.max_obstacles);
    rec.measures = measure(rec.map);
    rec.result = objective(rec.raw, rec.map, map_id);
    switch (config_.objective) {
        case ObjectiveKind::Runtime:
        case ObjectiveKind::Similarity: rec.plot_value = rec.result.objective; break;
        case ObjectiveKind::NegRsr: rec.plot_value = rec.result.mean_success_rates[0]; break;
        case ObjectiveKind::RuntimeGap:
        case ObjectiveKind::RsrGap: rec.plot_value = rec.result.signed_gap; break;
    }
    return rec;
}

nlohmann::json to_json(const ObjectiveResult& result, const ExperimentConfig& config) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : result.runs) {
        nlohmann::json j{{"algorithm", to_string(r.algorithm)},
                         {"instance", r.instance},
                         {"status", to_string(r.status)},
                         {"success_rate", r.success_rate},
                         {"sum_of_cost", r.sum_of_cost},
                         {"makespan", r.makespan}};
        if (is_rule_based(r.algorithm)) {
            j["rsr"] = r.rsr;
        } else {
            j["runtime"] = r.runtime;
        }
        runs.push_back(std::move(j));
    }
    nlohmann::json out{{"objective", result.objective},
                       {"raw_means", result.raw_means},
                       {"mean_success_rates", result.mean_success_rates},
                       {"no_solution_count", result.no_solution_count},
                       {"runs", runs}};
    if (config.algorithms.size() == 2) out["signed_gap"] = result.signed_gap;
    return out;
}

std::vector<std::string> map_rows(const GridMap& map) {
    std::vector<std::string> rows;
    for (int r = 0; r < map.height(); ++r) {
        std::string row;
        for (int c = 0; c < map.width(); ++c) row += map.at(Cell{r, c}) == Tile::Obstacle ? '@' : '.';
        rows.push_back(std::move(row));
    }
    return rows;
}

GridMap map_from_rows(const std::vector<std::string>& rows) {
    if (rows.empty()) throw MapError("map has no rows");
    const int w = static_cast<int>(rows.front().size());
    GridMap map(w, static_cast<int>(rows.size()));
    for (int r = 0; r < map.height(); ++r) {
        if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != w) throw MapError("ragged map rows");
        for (int c = 0; c < w; ++c) {
            const char g = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (g != '.' && g != '@') throw MapError(std::string("unknown map glyph '") + g + "'");
            map.set(Cell{r, c}, g == '@' ? Tile::Obstacle : Tile::Empty);
        }
    }
    return map;
}

}  // namespace mapgen::pipeline
