#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mapgen/measures.hpp"
#include "mapgen/movingai.hpp"
#include "mapgen/pipeline/config.hpp"
#include "mapgen/pipeline/evaluate.hpp"
#include "mapgen/pipeline/experiment.hpp"
#include "mapgen/pipeline/heatmap.hpp"
#include "mapgen/pipeline/persistence.hpp"
#include "mapgen/pipeline/validation.hpp"
#include "mapgen/repair.hpp"
#include "mapgen/solvers.hpp"

using namespace mapgen;
using namespace mapgen::pipeline;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::pair<int, int> parse_range(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ConfigError("expected lo,hi but got '" + text + "'");
    try {
        return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ConfigError("expected lo,hi but got '" + text + "'");
    }
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate and evaluate MAPF benchmark maps with quality-diversity search"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Run a QD map-generation experiment");
    std::string config_path, out_dir;
    std::int64_t seed_override = -1;
    int workers = 1;
    bool resume = false;
    gen->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    gen->add_option("--out", out_dir, "Output directory")->required();
    gen->add_option("--seed", seed_override, "Override the config seed");
    gen->add_option("--workers", workers, "Evaluation threads")->check(CLI::PositiveNumber);
    gen->add_flag("--resume", resume, "Continue from the checkpoint in --out");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Run one solver on a map and scenario");
    std::string map_path, scen_path, solver = "cbs";
    double w = 1.5, time_limit = 20.0;
    int max_makespan = 1000, agents = 0;
    std::uint64_t instance_seed = 0;
    eval->add_option("--map", map_path, "MovingAI .map file")->required()->check(CLI::ExistingFile);
    eval->add_option("--scen", scen_path, "MovingAI .scen file")->check(CLI::ExistingFile);
    eval->add_option("--agents", agents, "Use the first N scenario agents, or generate N agents without --scen");
    eval->add_option("--instance-seed", instance_seed, "Seed for generated instances");
    eval->add_option("--solver", solver, "cbs, eecbs, pbs or pibt");
    eval->add_option("--w", w, "EECBS suboptimality factor");
    eval->add_option("--time-limit", time_limit, "Seconds (search and priority-based solvers)");
    eval->add_option("--max-makespan", max_makespan, "Timesteps (PIBT)");

    // measure
    auto* meas = app.add_subcommand("measure", "Compute measures of maps, one CSV row per map");
    std::vector<std::string> measure_maps;
    std::string measure_list = "n_obstacles,kl_tile,tile_entropy,bc_std,lambda2,wl_kl", reference_dir, wl_map;
    int wl_iterations = 3;
    meas->add_option("maps", measure_maps, "Map files")->required()->check(CLI::ExistingFile);
    meas->add_option("--measures", measure_list, "Comma-separated measure names");
    meas->add_option("--reference", reference_dir, "Reference corpus directory (default: bundled)");
    meas->add_option("--wl-map", wl_map, "Reference map for WL features (default: first corpus map)");
    meas->add_option("--wl-iterations", wl_iterations, "WL refinement rounds");

    // repair
    auto* rep = app.add_subcommand("repair", "Make a raw map valid with an obstacle count in range");
    std::string in_path, out_path, range_text;
    rep->add_option("--in", in_path, "Input .map")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", out_path, "Output .map")->required();
    rep->add_option("--obstacle-range", range_text, "lo,hi")->required();

    // validate
    auto* val = app.add_subcommand("validate", "Solve many fresh instances on a map and report success");
    std::string val_map, val_solvers = "pibt";
    ValidationSettings vs;
    val->add_option("--map", val_map, "MovingAI .map file")->required()->check(CLI::ExistingFile);
    val->add_option("--solvers", val_solvers, "Comma-separated solvers");
    val->add_option("--agents", vs.n_agents, "Agents per instance");
    val->add_option("--runs", vs.n_runs, "Instances per solver");
    val->add_option("--time-limit", vs.time_limit, "Seconds");
    val->add_option("--max-makespan", vs.max_makespan, "Timesteps (PIBT)");
    val->add_option("--w", vs.eecbs_w, "EECBS suboptimality factor");
    val->add_option("--seed", vs.seed, "Instance seed");

    // render
    auto* ren = app.add_subcommand("render", "Render an archive file as heatmap CSV and SVG");
    std::string archive_path, csv_out, svg_out;
    ren->add_option("--archive", archive_path, "archive.jsonl")->required()->check(CLI::ExistingFile);
    ren->add_option("--csv", csv_out, "CSV output path")->required();
    ren->add_option("--svg", svg_out, "SVG output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*gen) {
            ExperimentConfig cfg = load_config_file(config_path);
            if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
            RunOptions opts;
            opts.out_dir = out_dir;
            opts.workers = workers;
            opts.resume = resume;
            opts.on_batch = [](const BatchReport& r) {
                std::printf("batch %d evaluations %d cells %zu qd_score %.6g best %.6g\n", r.batch, r.evaluations, r.cells,
                            r.qd_score, r.batch_best_objective);
                std::fflush(stdout);
            };
            const RunResult res = run_experiment(cfg, opts);
            std::printf("done: %d evaluations, %zu cells, qd_score %.6g\n", res.evaluations, res.archive.size(), res.archive.qd_score());
        } else if (*eval) {
            const GridMap map = load_map_file(map_path);
            std::vector<AgentTask> tasks;
            if (!scen_path.empty()) {
                tasks = parse_scen(load_text_file(scen_path), map);
                if (agents > 0 && agents < static_cast<int>(tasks.size())) tasks.resize(static_cast<std::size_t>(agents));
            } else {
                if (agents <= 0) throw ConfigError("evaluate needs --scen or --agents");
                tasks = generate_instance(map, agents, instance_seed).agents();
            }
            const MapfInstance inst(map, tasks);
            if (solver == "pibt") {
                const PibtResult r = solve_pibt(inst, max_makespan);
                if (!validate_paths(inst, r.trajectories).empty()) throw std::runtime_error("PIBT produced a conflict");
                std::printf("solver=pibt success_rate=%.6f sum_of_cost=%ld makespan=%d cpu_runtime=%.6f\n", r.success_rate,
                            r.sum_of_cost, r.makespan, r.cpu_runtime);
            } else {
                const Algorithm algo = parse_algorithm(solver);
                const Solution s = algo == Algorithm::Pbs ? solve_pbs(inst, time_limit)
                                                          : solve_cbs(inst, algo == Algorithm::Cbs ? 1.0 : w, time_limit);
                if (s.status == SolveStatus::Solved && !validate_solution(inst, s).empty()) {
                    throw std::runtime_error("solver produced a conflict");
                }
                std::printf("solver=%s status=%s sum_of_cost=%ld makespan=%d cpu_runtime=%.6f\n", solver.c_str(),
                            to_string(s.status).c_str(), s.sum_of_cost, s.makespan, s.cpu_runtime);
            }
        } else if (*meas) {
            const auto names = split(measure_list);
            const MeasureContext ctx(reference_dir, wl_map, wl_iterations);
            std::string header = "file";
            for (const auto& n : names) header += "," + n;
            std::printf("%s\n", header.c_str());
            for (const auto& path : measure_maps) {
                const GridMap map = load_map_file(path);
                std::string row = path;
                for (const auto& n : names) {
                    char buf[40];
                    std::snprintf(buf, sizeof buf, ",%.17g", ctx.compute(n, map));
                    row += buf;
                }
                std::printf("%s\n", row.c_str());
            }
        } else if (*rep) {
            const auto [lo, hi] = parse_range(range_text);
            const GridMap raw = load_map_file(in_path);
            if (lo < 0 || lo > hi || hi > raw.size() - 1) throw ConfigError("obstacle range must satisfy 0 <= lo <= hi < width*height");
            const GridMap fixed = repair(raw, lo, hi);
            save_text_file(out_path, serialize_map(fixed));
            std::printf("obstacles=%d similarity=%.6f\n", measures::count_obstacles(fixed), similarity(raw, fixed));
        } else if (*val) {
            const GridMap map = load_map_file(val_map);
            std::printf("%s\n", validation_csv_header().c_str());
            for (const auto& s : split(val_solvers)) {
                const ValidationReport r = validate_map(map, parse_algorithm(s), vs);
                std::printf("%s\n", to_csv_row(r).c_str());
            }
        } else if (*ren) {
            const LoadedArchive loaded = parse_archive(load_text_file(archive_path));
            const ExperimentConfig cfg = load_config(loaded.meta.at("config"));
            write_file_atomic(csv_out, heatmap_csv(loaded.archive));
            write_file_atomic(svg_out, heatmap_svg(loaded.archive, cfg));
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeError;
    }
    return 0;
}
