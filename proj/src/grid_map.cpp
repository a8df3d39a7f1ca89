#include "mapgen/grid_map.hpp"

#include <algorithm>
#include <queue>

namespace mapgen {

GridMap::GridMap(int width, int height, Tile fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw MapError("map dimensions must be positive");
    }
    tiles_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GridMap::GridMap(int width, int height, std::vector<Tile> tiles)
    : width_(width), height_(height), tiles_(std::move(tiles)) {
    if (width < 1 || height < 1) {
        throw MapError("map dimensions must be positive");
    }
    if (tiles_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw MapError("tile count does not match width*height");
    }
}

int GridMap::empty_neighbors(int index, std::array<int, 4>& out) const {
    const Cell c = cell(index);
    int n = 0;
    for (const Cell& d : kNeighborOffsets) {
        const Cell nb{c.row + d.row, c.col + d.col};
        if (in_bounds(nb) && at(nb) == Tile::Empty) {
            out[static_cast<std::size_t>(n++)] = this->index(nb);
        }
    }
    return n;
}

int GridMap::count_empty() const {
    return static_cast<int>(std::count(tiles_.begin(), tiles_.end(), Tile::Empty));
}

int label_components(const GridMap& map, std::vector<int>& labels) {
    labels.assign(static_cast<std::size_t>(map.size()), -1);
    std::vector<int> stack;
    std::array<int, 4> nbs{};
    int next = 0;
    for (int start = 0; start < map.size(); ++start) {
        if (!map.is_empty(start) || labels[static_cast<std::size_t>(start)] != -1) continue;
        labels[static_cast<std::size_t>(start)] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            const int n = map.empty_neighbors(v, nbs);
            for (int k = 0; k < n; ++k) {
                auto& l = labels[static_cast<std::size_t>(nbs[static_cast<std::size_t>(k)])];
                if (l == -1) {
                    l = next;
                    stack.push_back(nbs[static_cast<std::size_t>(k)]);
                }
            }
        }
        ++next;
    }
    return next;
}

bool is_valid(const GridMap& map) {
    std::vector<int> labels;
    return label_components(map, labels) == 1;
}

DistanceField bfs_distances(const GridMap& map, int source_index) {
    if (source_index < 0 || source_index >= map.size() || !map.is_empty(source_index)) {
        throw MapError("BFS source must be an Empty tile");
    }
    DistanceField field;
    field.source = source_index;
    field.dist.assign(static_cast<std::size_t>(map.size()), kUnreachable);
    std::vector<int> queue;
    queue.reserve(static_cast<std::size_t>(map.size()));
    queue.push_back(source_index);
    field.dist[static_cast<std::size_t>(source_index)] = 0;
    std::array<int, 4> nbs{};
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int v = queue[head];
        const int dv = field.dist[static_cast<std::size_t>(v)];
        const int n = map.empty_neighbors(v, nbs);
        for (int k = 0; k < n; ++k) {
            const int u = nbs[static_cast<std::size_t>(k)];
            if (field.dist[static_cast<std::size_t>(u)] == kUnreachable) {
                field.dist[static_cast<std::size_t>(u)] = dv + 1;
                queue.push_back(u);
            }
        }
    }
    return field;
}

DistanceField bfs_distances(const GridMap& map, Cell source) {
    if (!map.in_bounds(source)) {
        throw MapError("BFS source out of bounds");
    }
    return bfs_distances(map, map.index(source));
}

}  // namespace mapgen
