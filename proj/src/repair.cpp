#include "mapgen/repair.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace mapgen {

namespace {

// Tiles bucketed by a small key (0..4), each bucket ordered by row-major index.
class Buckets {
public:
    void insert(int key, int index) { sets_[static_cast<std::size_t>(key)].insert(index); }
    void erase(int key, int index) { sets_[static_cast<std::size_t>(key)].erase(index); }
    const std::set<int>& operator[](int key) const { return sets_[static_cast<std::size_t>(key)]; }

private:
    std::array<std::set<int>, 5> sets_;
};

void keep_largest_component(GridMap& map) {
    std::vector<int> labels;
    const int n = label_components(map, labels);
    if (n <= 1) return;
    std::vector<int> sizes(static_cast<std::size_t>(n), 0);
    for (int l : labels) {
        if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
    }
    // Labels are assigned in row-major order of first tile, so the first maximum wins ties.
    int keep = 0;
    for (int l = 1; l < n; ++l) {
        if (sizes[static_cast<std::size_t>(l)] > sizes[static_cast<std::size_t>(keep)]) keep = l;
    }
    for (int i = 0; i < map.size(); ++i) {
        if (labels[static_cast<std::size_t>(i)] >= 0 && labels[static_cast<std::size_t>(i)] != keep) map.set(i, Tile::Obstacle);
    }
}

int count_obstacles_in(const GridMap& map) { return map.size() - map.count_empty(); }

void open_obstacles(GridMap& map, int max_obstacles) {
    int obstacles = count_obstacles_in(map);
    if (obstacles <= max_obstacles) return;
    Buckets frontier;  // obstacles keyed by Empty-neighbor count (>= 1)
    std::vector<int> key(static_cast<std::size_t>(map.size()), 0);
    for (int i = 0; i < map.size(); ++i) {
        if (map.is_empty(i)) continue;
        const Cell c = map.cell(i);
        int k = 0;
        for (const Cell d : kNeighborOffsets) k += map.is_empty(Cell{c.row + d.row, c.col + d.col}) ? 1 : 0;
        key[static_cast<std::size_t>(i)] = k;
        if (k > 0) frontier.insert(k, i);
    }
    while (obstacles > max_obstacles) {
        int pick = -1;
        for (int k = 4; k >= 1 && pick < 0; --k) {
            if (!frontier[k].empty()) pick = *frontier[k].begin();
        }
        frontier.erase(key[static_cast<std::size_t>(pick)], pick);
        map.set(pick, Tile::Empty);
        --obstacles;
        const Cell c = map.cell(pick);
        for (const Cell d : kNeighborOffsets) {
            const Cell nb{c.row + d.row, c.col + d.col};
            if (!map.in_bounds(nb) || map.at(nb) != Tile::Obstacle) continue;
            const int j = map.index(nb);
            auto& kj = key[static_cast<std::size_t>(j)];
            if (kj > 0) frontier.erase(kj, j);
            ++kj;
            frontier.insert(kj, j);
        }
    }
}

// Empty 8-neighborhood ring of `index`, clockwise from the top-left corner.
constexpr std::array<Cell, 8> kRing{{{-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}}};

// Sufficient condition for `index` not being an articulation point: its Empty 4-neighbors are
// linked through Empty tiles of the surrounding ring.
bool locally_removable(const GridMap& map, int index) {
    const Cell c = map.cell(index);
    std::array<bool, 8> empty{};
    for (int k = 0; k < 8; ++k) empty[static_cast<std::size_t>(k)] = map.is_empty(Cell{c.row + kRing[static_cast<std::size_t>(k)].row, c.col + kRing[static_cast<std::size_t>(k)].col});
    int start = -1;
    for (int k = 0; k < 8; ++k) {
        if (!empty[static_cast<std::size_t>(k)]) start = k;
    }
    if (start < 0) return true;
    int runs_with_neighbor = 0;
    bool in_run = false, run_has_neighbor = false;
    for (int step = 1; step <= 8; ++step) {
        const int k = (start + step) % 8;
        if (empty[static_cast<std::size_t>(k)]) {
            if (!in_run) {
                in_run = true;
                run_has_neighbor = false;
            }
            run_has_neighbor = run_has_neighbor || k % 2 == 1;
        } else if (in_run) {
            in_run = false;
            runs_with_neighbor += run_has_neighbor ? 1 : 0;
        }
    }
    if (in_run) runs_with_neighbor += run_has_neighbor ? 1 : 0;
    return runs_with_neighbor <= 1;
}

// Whether closing `index` disconnects its Empty neighbors. The search from one neighbor stops as
// soon as it has reached all the others.
bool is_articulation(const GridMap& map, int index, std::vector<int>& queue, std::vector<int>& seen, int& stamp) {
    std::array<int, 4> nbs{};
    const int n = map.empty_neighbors(index, nbs);
    if (n <= 1) return false;
    ++stamp;
    seen[static_cast<std::size_t>(index)] = stamp;
    seen[static_cast<std::size_t>(nbs[0])] = stamp;
    int missing = n - 1;
    std::array<int, 4> targets = nbs;
    queue.assign(1, nbs[0]);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        std::array<int, 4> next{};
        const int m = map.empty_neighbors(queue[head], next);
        for (int k = 0; k < m; ++k) {
            const int u = next[static_cast<std::size_t>(k)];
            if (seen[static_cast<std::size_t>(u)] == stamp) continue;
            seen[static_cast<std::size_t>(u)] = stamp;
            for (int j = 1; j < n; ++j) {
                if (targets[static_cast<std::size_t>(j)] == u) {
                    targets[static_cast<std::size_t>(j)] = -1;
                    if (--missing == 0) return false;
                }
            }
            queue.push_back(u);
        }
    }
    return true;
}

void close_empties(GridMap& map, int min_obstacles) {
    int obstacles = count_obstacles_in(map);
    if (obstacles >= min_obstacles) return;
    Buckets candidates;  // Empty tiles keyed by obstacle-neighbor count
    std::vector<int> key(static_cast<std::size_t>(map.size()), 0);
    auto obstacle_neighbors = [&](int i) {
        const Cell c = map.cell(i);
        int k = 0;
        for (const Cell d : kNeighborOffsets) {
            const Cell nb{c.row + d.row, c.col + d.col};
            k += map.in_bounds(nb) && map.at(nb) == Tile::Obstacle ? 1 : 0;
        }
        return k;
    };
    for (int i = 0; i < map.size(); ++i) {
        if (!map.is_empty(i)) continue;
        key[static_cast<std::size_t>(i)] = obstacle_neighbors(i);
        candidates.insert(key[static_cast<std::size_t>(i)], i);
    }
    // Closing a non-articulation tile v can only un-cut a tile u when u was v's sole Empty
    // neighbor, so cut flags stay valid between steps apart from that one case.
    std::vector<char> cut(static_cast<std::size_t>(map.size()), 0);
    std::vector<int> queue, seen(static_cast<std::size_t>(map.size()), 0);
    int stamp = 0;
    auto is_cut = [&](int i) {
        if (!cut[static_cast<std::size_t>(i)]) cut[static_cast<std::size_t>(i)] = is_articulation(map, i, queue, seen, stamp) ? 1 : 0;
        return cut[static_cast<std::size_t>(i)] != 0;
    };
    while (obstacles < min_obstacles) {
        int pick = -1;
        for (int k = 0; k <= 4 && pick < 0; ++k) {
            for (int i : candidates[k]) {
                if (locally_removable(map, i) || !is_cut(i)) {
                    pick = i;
                    break;
                }
            }
        }
        // A connected graph with >= 2 vertices always has a non-articulation vertex.
        candidates.erase(key[static_cast<std::size_t>(pick)], pick);
        map.set(pick, Tile::Obstacle);
        ++obstacles;
        std::array<int, 4> nbs{};
        if (map.empty_neighbors(pick, nbs) == 1) cut[static_cast<std::size_t>(nbs[0])] = 0;
        const Cell c = map.cell(pick);
        for (const Cell d : kNeighborOffsets) {
            const Cell nb{c.row + d.row, c.col + d.col};
            if (!map.is_empty(nb)) continue;
            const int j = map.index(nb);
            candidates.erase(key[static_cast<std::size_t>(j)], j);
            ++key[static_cast<std::size_t>(j)];
            candidates.insert(key[static_cast<std::size_t>(j)], j);
        }
    }
}

}  // namespace

GridMap repair(const GridMap& raw, int min_obstacles, int max_obstacles) {
    if (min_obstacles < 0 || min_obstacles > max_obstacles) throw MapError("invalid obstacle range");
    if (max_obstacles > raw.size() - 1) throw MapError("obstacle upper bound leaves no Empty tile");
    GridMap map = raw;
    if (map.count_empty() == 0) map.set(Cell{map.height() / 2, map.width() / 2}, Tile::Empty);
    keep_largest_component(map);
    open_obstacles(map, max_obstacles);
    close_empties(map, min_obstacles);
    keep_largest_component(map);
    return map;
}

double similarity(const GridMap& a, const GridMap& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw MapError("similarity needs maps of equal size");
    int same = 0;
    for (int i = 0; i < a.size(); ++i) same += a.at(i) == b.at(i) ? 1 : 0;
    return static_cast<double>(same) / a.size();
}

}  // namespace mapgen
