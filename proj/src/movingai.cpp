#include "mapgen/movingai.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mapgen {

FormatError::FormatError(int line, int column, const std::string& what)
    : MapError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = end + 1;
    }
    return lines;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t end = line.find(sep, pos);
        out.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return out;
}

int parse_int(std::string_view s, int line, int column, const char* what) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw FormatError(line, column, std::string("expected integer ") + what + ", got '" + std::string(s) + "'");
    }
    return value;
}

int header_value(std::string_view line, std::string_view key, int line_no) {
    if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != ' ') {
        throw FormatError(line_no, 1, "expected '" + std::string(key) + " <n>'");
    }
    const int v = parse_int(line.substr(key.size() + 1), line_no, static_cast<int>(key.size()) + 2, key.data());
    if (v < 1) throw FormatError(line_no, static_cast<int>(key.size()) + 2, "dimension must be positive");
    return v;
}

}  // namespace

GridMap parse_map(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.size() < 4) throw FormatError(static_cast<int>(lines.size()) + 1, 1, "truncated map header");
    if (lines[0].substr(0, 5) != "type ") throw FormatError(1, 1, "expected 'type <name>'");
    const int height = header_value(lines[1], "height", 2);
    const int width = header_value(lines[2], "width", 3);
    if (lines[3] != "map") throw FormatError(4, 1, "expected 'map'");

    std::vector<Tile> tiles;
    tiles.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (int r = 0; r < height; ++r) {
        const int line_no = 5 + r;
        if (static_cast<std::size_t>(4 + r) >= lines.size()) {
            throw FormatError(line_no, 1, "expected " + std::to_string(height) + " map rows, found " + std::to_string(r));
        }
        const std::string_view row = lines[static_cast<std::size_t>(4 + r)];
        if (static_cast<int>(row.size()) != width) {
            throw FormatError(line_no, static_cast<int>(std::min<std::size_t>(row.size(), width)) + 1,
                              "row length " + std::to_string(row.size()) + " does not match width " +
                                  std::to_string(width));
        }
        for (int c = 0; c < width; ++c) {
            switch (row[static_cast<std::size_t>(c)]) {
                case '.':
                case 'G':
                    tiles.push_back(Tile::Empty);
                    break;
                case '@':
                case 'O':
                case 'T':
                    tiles.push_back(Tile::Obstacle);
                    break;
                default:
                    throw FormatError(line_no, c + 1, std::string("unknown tile glyph '") + row[static_cast<std::size_t>(c)] + "'");
            }
        }
    }
    for (std::size_t k = 4 + static_cast<std::size_t>(height); k < lines.size(); ++k) {
        if (!lines[k].empty()) throw FormatError(static_cast<int>(k) + 1, 1, "unexpected content after map rows");
    }
    return GridMap(width, height, std::move(tiles));
}

std::string serialize_map(const GridMap& map) {
    std::string out = "type octile\nheight " + std::to_string(map.height()) + "\nwidth " +
                      std::to_string(map.width()) + "\nmap\n";
    out.reserve(out.size() + static_cast<std::size_t>(map.size() + map.height()));
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            out.push_back(map.at(Cell{r, c}) == Tile::Empty ? '.' : '@');
        }
        out.push_back('\n');
    }
    return out;
}

std::vector<AgentTask> parse_scen(std::string_view text, const GridMap& map) {
    const auto lines = split_lines(text);
    std::vector<AgentTask> agents;
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const int line_no = static_cast<int>(k) + 1;
        const std::string_view line = lines[k];
        if (line.empty()) continue;
        if (k == 0 && line.substr(0, 7) == "version") continue;
        const auto f = split_fields(line, '\t');
        if (f.size() != 9) {
            throw FormatError(line_no, 1, "expected 9 tab-separated fields, found " + std::to_string(f.size()));
        }
        const int w = parse_int(f[2], line_no, 3, "width");
        const int h = parse_int(f[3], line_no, 4, "height");
        if (w != map.width() || h != map.height()) {
            throw FormatError(line_no, 3, "scenario dimensions do not match the map");
        }
        const Cell start{parse_int(f[5], line_no, 6, "start y"), parse_int(f[4], line_no, 5, "start x")};
        const Cell goal{parse_int(f[7], line_no, 8, "goal y"), parse_int(f[6], line_no, 7, "goal x")};
        if (!map.in_bounds(start)) throw FormatError(line_no, 5, "start out of bounds");
        if (!map.in_bounds(goal)) throw FormatError(line_no, 7, "goal out of bounds");
        if (!map.is_empty(start)) throw FormatError(line_no, 5, "start on obstacle");
        if (!map.is_empty(goal)) throw FormatError(line_no, 7, "goal on obstacle");
        agents.push_back({start, goal});
    }
    return agents;
}

std::string serialize_scen(const MapfInstance& instance, std::string_view map_name, int bucket_width) {
    const GridMap& map = instance.map();
    std::ostringstream out;
    out << "version 1\n";
    for (const AgentTask& a : instance.agents()) {
        const int d = bfs_distances(map, a.start)[map.index(a.goal)];
        if (d == kUnreachable) throw MapError("scenario goal unreachable from start");
        out << d / bucket_width << '\t' << map_name << '\t' << map.width() << '\t' << map.height() << '\t'
            << a.start.col << '\t' << a.start.row << '\t' << a.goal.col << '\t' << a.goal.row << '\t' << d << '\n';
    }
    return out.str();
}

std::string load_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MapError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void save_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MapError("cannot write " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

GridMap load_map_file(const std::string& path) { return parse_map(load_text_file(path)); }

}  // namespace mapgen
