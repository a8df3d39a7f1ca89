#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "mapgen/qd/archive.hpp"

namespace mapgen::pipeline {

/// Line-delimited JSON: a header line {"type":"meta", ...} followed by one {"type":"cell", ...}
/// line per occupied cell in row-major bin order. Keys are sorted, so equal archives serialize
/// to equal bytes.
std::string serialize_archive(const qd::Archive& archive, const nlohmann::json& meta);

struct LoadedArchive {
    nlohmann::json meta;
    qd::Archive archive;
};

/// Inverse of serialize_archive. Axes, alpha and min_f are read from meta["archive"].
LoadedArchive parse_archive(const std::string& text);

nlohmann::json archive_settings(const qd::Archive& archive);

/// Writes to `path` through a temporary file and rename, so readers never see a partial file.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace mapgen::pipeline
