#include "mapgen/pipeline/experiment.hpp"

#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <omp.h>

#include "mapgen/movingai.hpp"
#include "mapgen/nca.hpp"
#include "mapgen/pipeline/evaluate.hpp"
#include "mapgen/pipeline/heatmap.hpp"
#include "mapgen/pipeline/persistence.hpp"
#include "mapgen/qd/emitter.hpp"
#include "mapgen/rng.hpp"

namespace mapgen::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* status_name(qd::AddResult::Status s) {
    switch (s) {
        case qd::AddResult::Status::New: return "new";
        case qd::AddResult::Status::Improved: return "improved";
        case qd::AddResult::Status::NotAdded: return "not_added";
    }
    return "?";
}

json report_json(const BatchReport& r) {
    return {{"batch", r.batch},
            {"evaluations", r.evaluations},
            {"qd_score", r.qd_score},
            {"cells", r.cells},
            {"batch_best_objective", r.batch_best_objective},
            {"batch_best_plot_value", r.batch_best_plot_value}};
}

BatchReport report_from_json(const json& j) {
    BatchReport r;
    r.batch = j.at("batch").get<int>();
    r.evaluations = j.at("evaluations").get<int>();
    r.qd_score = j.at("qd_score").get<double>();
    r.cells = j.at("cells").get<std::size_t>();
    r.batch_best_objective = j.at("batch_best_objective").get<double>();
    r.batch_best_plot_value = j.at("batch_best_plot_value").get<double>();
    return r;
}

json run_meta(const ExperimentConfig& config, int evaluations) {
    return {{"config", to_json(config)}, {"config_source", config.source}, {"seed", config.seed}, {"evaluations", evaluations}};
}

// Keeps the first `lines` lines of the evaluation log; later lines belong to a batch whose
// checkpoint was never written.
void truncate_log(const fs::path& path, int lines) {
    std::string kept;
    {
        std::ifstream in(path);
        std::string line;
        for (int k = 0; k < lines && std::getline(in, line); ++k) kept += line + "\n";
    }
    write_file_atomic(path.string(), kept);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    const Evaluator evaluator(config);
    const int dim = param_count(config.nca);
    RunResult result{qd::Archive(config.axes, config.alpha, config.min_f), {}, 0, false};
    qd::CmaEmitter emitter(dim, config.emitter, splitmix64(config.seed ^ 0x3C6EF372FE94F82BULL));

    const bool persist = !options.out_dir.empty();
    const fs::path out(options.out_dir);
    const fs::path ckpt = out / "checkpoint";
    const fs::path log_path = out / "evaluations.jsonl";
    if (persist) fs::create_directories(ckpt);

    if (persist && options.resume && fs::exists(ckpt / "state.json")) {
        const json state = json::parse(load_text_file((ckpt / "state.json").string()));
        if (state.at("config") != to_json(config)) throw ConfigError("checkpoint was written with a different configuration");
        result.archive = parse_archive(load_text_file((ckpt / "archive.jsonl").string())).archive;
        std::ifstream em(ckpt / "emitter.bin", std::ios::binary);
        emitter.load(em);
        result.evaluations = state.at("evaluations").get<int>();
        for (const auto& b : state.at("batches")) result.batches.push_back(report_from_json(b));
        result.resumed = true;
        truncate_log(log_path, result.evaluations);
    } else if (persist) {
        write_file_atomic(log_path.string(), "");
    }

    const int batch_size = config.emitter.batch_size;
    const int workers = std::max(1, options.workers);
    while (result.evaluations < config.n_evals) {
        const auto samples = emitter.ask();
        const int count = std::min(batch_size, config.n_evals - result.evaluations);
        std::vector<EvalRecord> records(static_cast<std::size_t>(count));
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
        const auto first_id = static_cast<std::uint64_t>(result.evaluations);

#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
        for (int j = 0; j < count; ++j) {
            try {
                records[static_cast<std::size_t>(j)] = evaluator.evaluate(samples[static_cast<std::size_t>(j)], first_id + static_cast<std::uint64_t>(j));
            } catch (...) {
                errors[static_cast<std::size_t>(j)] = std::current_exception();
            }
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }

        BatchReport report;
        report.batch = static_cast<int>(result.batches.size());
        report.batch_best_objective = -std::numeric_limits<double>::infinity();
        std::vector<double> improvements;
        std::string log;
        for (int j = 0; j < count; ++j) {
            EvalRecord& rec = records[static_cast<std::size_t>(j)];
            const json diagnostics = to_json(rec.result, config);
            const json payload{{"map_id", rec.map_id},
                               {"map", map_rows(rec.map)},
                               {"plot_value", rec.plot_value},
                               {"no_solution_count", rec.result.no_solution_count},
                               {"diagnostics", diagnostics}};
            const auto add = result.archive.add(samples[static_cast<std::size_t>(j)], rec.result.objective, rec.measures, payload);
            improvements.push_back(add.improvement);
            if (rec.result.objective > report.batch_best_objective) {
                report.batch_best_objective = rec.result.objective;
                report.batch_best_plot_value = rec.plot_value;
            }
            const json line{{"eval_id", rec.map_id},
                            {"batch", report.batch},
                            {"objective", rec.result.objective},
                            {"measures", rec.measures},
                            {"plot_value", rec.plot_value},
                            {"cell", {add.cell.first, add.cell.second}},
                            {"status", status_name(add.status)},
                            {"improvement", add.improvement},
                            {"diagnostics", diagnostics}};
            log += line.dump() + "\n";
        }
        // A truncated final batch ends the run, so the emitter is not told about it.
        if (count == batch_size) emitter.tell(improvements, result.archive);

        result.evaluations += count;
        report.evaluations = result.evaluations;
        report.qd_score = result.archive.qd_score();
        report.cells = result.archive.size();
        result.batches.push_back(report);

        if (persist) {
            {
                std::ofstream lf(log_path, std::ios::app);
                lf << log;
            }
            write_file_atomic((ckpt / "archive.jsonl").string(), serialize_archive(result.archive, run_meta(config, result.evaluations)));
            std::ostringstream em;
            emitter.save(em);
            write_file_atomic((ckpt / "emitter.bin").string(), em.str());
            json batches = json::array();
            for (const auto& b : result.batches) batches.push_back(report_json(b));
            write_file_atomic((ckpt / "state.json").string(),
                              json{{"config", to_json(config)}, {"evaluations", result.evaluations}, {"batches", batches}}.dump());
        }
        if (options.on_batch) options.on_batch(report);
    }

    if (persist) {
        write_file_atomic((out / "archive.jsonl").string(), serialize_archive(result.archive, run_meta(config, result.evaluations)));
        if (!result.archive.empty()) {
            write_file_atomic((out / "heatmap.csv").string(), heatmap_csv(result.archive));
            write_file_atomic((out / "heatmap.svg").string(), heatmap_svg(result.archive, config));
        }
    }
    return result;
}

}  // namespace mapgen::pipeline
