#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mapgen {

enum class Tile : std::uint8_t { Empty = 0, Obstacle = 1 };

/// Grid coordinate. Row 0 is the top row.
struct Cell {
    int row = 0;
    int col = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Neighbor expansion order used everywhere tie-breaking matters: Up, Down, Left, Right.
inline constexpr std::array<Cell, 4> kNeighborOffsets{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

class MapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Four-connected grid of Empty/Obstacle tiles stored row-major.
class GridMap {
public:
    GridMap(int width, int height, Tile fill = Tile::Empty);
    GridMap(int width, int height, std::vector<Tile> tiles);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int size() const noexcept { return width_ * height_; }

    bool in_bounds(Cell c) const noexcept {
        return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
    }
    int index(Cell c) const noexcept { return c.row * width_ + c.col; }
    Cell cell(int index) const noexcept { return {index / width_, index % width_}; }

    Tile at(Cell c) const { return tiles_[static_cast<std::size_t>(index(c))]; }
    Tile at(int index) const { return tiles_[static_cast<std::size_t>(index)]; }
    void set(Cell c, Tile t) { tiles_[static_cast<std::size_t>(index(c))] = t; }
    void set(int index, Tile t) { tiles_[static_cast<std::size_t>(index)] = t; }

    bool is_empty(Cell c) const { return in_bounds(c) && at(c) == Tile::Empty; }
    bool is_empty(int index) const { return tiles_[static_cast<std::size_t>(index)] == Tile::Empty; }

    const std::vector<Tile>& tiles() const noexcept { return tiles_; }

    /// Empty 4-neighbors of `index` in Up, Down, Left, Right order. Returns the count written.
    int empty_neighbors(int index, std::array<int, 4>& out) const;

    int count_empty() const;

    friend bool operator==(const GridMap&, const GridMap&) = default;

private:
    int width_;
    int height_;
    std::vector<Tile> tiles_;
};

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Single-source BFS distances over Empty tiles.
struct DistanceField {
    int source = 0;
    std::vector<int> dist;

    int operator[](int index) const { return dist[static_cast<std::size_t>(index)]; }
    bool reachable(int index) const { return dist[static_cast<std::size_t>(index)] != kUnreachable; }
};

/// True iff the map has at least one Empty tile and all Empty tiles form one 4-connected component.
bool is_valid(const GridMap& map);

DistanceField bfs_distances(const GridMap& map, Cell source);
DistanceField bfs_distances(const GridMap& map, int source_index);

/// Component label per tile (-1 for obstacles); returns the number of components.
int label_components(const GridMap& map, std::vector<int>& labels);

}  // namespace mapgen
