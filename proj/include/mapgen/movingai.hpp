#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mapgen/instance.hpp"

namespace mapgen {

/// Parse error carrying the 1-based line and column of the offending input.
class FormatError : public MapError {
public:
    FormatError(int line, int column, const std::string& what);
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// MovingAI `.map` text. '.' and 'G' are Empty; '@', 'O' and 'T' are Obstacle.
GridMap parse_map(std::string_view text);
/// Writes the header and '.'/'@' rows with LF line endings.
std::string serialize_map(const GridMap& map);

/// MovingAI scenario (version 1). The "version" header line is optional on input.
/// Coordinates in the file are (x = column, y = row).
std::vector<AgentTask> parse_scen(std::string_view text, const GridMap& map);
/// Bucket column = BFS distance / bucket_width; optimal-length column = BFS distance.
std::string serialize_scen(const MapfInstance& instance, std::string_view map_name = "map.map",
                           int bucket_width = 4);

GridMap load_map_file(const std::string& path);
void save_text_file(const std::string& path, std::string_view text);
std::string load_text_file(const std::string& path);

}  // namespace mapgen
