#include "mapgen/pipeline/persistence.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mapgen::pipeline {

using nlohmann::json;

json archive_settings(const qd::Archive& archive) {
    json axes = json::array();
    for (const auto& a : archive.axes()) axes.push_back({{"name", a.name}, {"lower", a.lower}, {"upper", a.upper}, {"bins", a.bins}});
    return {{"axes", axes}, {"alpha", archive.alpha()}, {"min_f", archive.min_f()}};
}

std::string serialize_archive(const qd::Archive& archive, const json& meta) {
    json header = meta;
    header["type"] = "meta";
    header["archive"] = archive_settings(archive);
    header["cells"] = archive.size();
    header["qd_score"] = archive.qd_score();
    std::string out = header.dump() + "\n";
    for (const auto& [bin, e] : archive.cells()) {
        const json cell{{"type", "cell"},
                        {"bin", {bin.first, bin.second}},
                        {"objective", e.objective},
                        {"threshold", e.threshold},
                        {"measures", e.measures},
                        {"payload", e.payload},
                        {"genome", e.solution}};
        out += cell.dump();
        out += '\n';
    }
    return out;
}

LoadedArchive parse_archive(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("archive file is empty");
    json meta = json::parse(line);
    if (meta.value("type", "") != "meta") throw std::runtime_error("archive file does not start with a meta line");
    const json& s = meta.at("archive");
    std::array<qd::MeasureAxis, 2> axes;
    for (std::size_t k = 0; k < 2; ++k) {
        const json& a = s.at("axes").at(k);
        axes[k] = {a.at("name").get<std::string>(), a.at("lower").get<double>(), a.at("upper").get<double>(), a.at("bins").get<int>()};
    }
    LoadedArchive out{meta, qd::Archive(axes, s.at("alpha").get<double>(), s.at("min_f").get<double>())};
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json c = json::parse(line);
        qd::Elite e;
        e.solution = c.at("genome").get<std::vector<double>>();
        e.objective = c.at("objective").get<double>();
        e.threshold = c.at("threshold").get<double>();
        e.measures = c.at("measures").get<std::vector<double>>();
        e.payload = c.at("payload");
        out.archive.restore({c.at("bin").at(0).get<int>(), c.at("bin").at(1).get<int>()}, std::move(e));
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << contents;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace mapgen::pipeline
