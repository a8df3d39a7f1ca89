#pragma once

// Independent reference implementations used by the tests. They favor obviousness over speed
// and share no code with the library beyond the GridMap container.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mapgen/grid_map.hpp"

namespace oracle {

using mapgen::Cell;
using mapgen::GridMap;
using mapgen::Tile;

inline GridMap random_raw_map(std::mt19937_64& rng, int width, int height, double obstacle_prob) {
    std::bernoulli_distribution obstacle(obstacle_prob);
    GridMap m(width, height);
    for (int i = 0; i < m.size(); ++i) m.set(i, obstacle(rng) ? Tile::Obstacle : Tile::Empty);
    return m;
}

/// Flood fill from every Empty tile; keeps the biggest region.
inline GridMap largest_region(const GridMap& raw) {
    GridMap best(raw.width(), raw.height(), Tile::Obstacle);
    int best_size = 0;
    std::vector<char> seen(static_cast<std::size_t>(raw.size()), 0);
    for (int s = 0; s < raw.size(); ++s) {
        if (raw.at(s) != Tile::Empty || seen[s]) continue;
        GridMap region(raw.width(), raw.height(), Tile::Obstacle);
        std::vector<int> todo{s};
        seen[s] = 1;
        int n = 0;
        while (!todo.empty()) {
            const int v = todo.back();
            todo.pop_back();
            region.set(v, Tile::Empty);
            ++n;
            const Cell c = raw.cell(v);
            const Cell nbs[4] = {{c.row - 1, c.col}, {c.row + 1, c.col}, {c.row, c.col - 1}, {c.row, c.col + 1}};
            for (const Cell nb : nbs) {
                if (!raw.in_bounds(nb) || raw.at(nb) != Tile::Empty || seen[raw.index(nb)]) continue;
                seen[raw.index(nb)] = 1;
                todo.push_back(raw.index(nb));
            }
        }
        if (n > best_size) {
            best_size = n;
            best = region;
        }
    }
    return best;
}

/// Valid map with at least `min_empty` Empty tiles.
inline GridMap random_valid_map(std::mt19937_64& rng, int width, int height, double obstacle_prob, int min_empty = 2) {
    for (;;) {
        GridMap m = largest_region(random_raw_map(rng, width, height, obstacle_prob));
        if (m.count_empty() >= min_empty) return m;
    }
}

inline std::vector<int> empty_tiles(const GridMap& m) {
    std::vector<int> out;
    for (int i = 0; i < m.size(); ++i) {
        if (m.at(i) == Tile::Empty) out.push_back(i);
    }
    return out;
}

inline bool adjacent(const GridMap& m, int a, int b) {
    const Cell x = m.cell(a), y = m.cell(b);
    return std::abs(x.row - y.row) + std::abs(x.col - y.col) == 1;
}

/// Second-smallest eigenvalue of I - D^-1/2 A D^-1/2 by dense eigendecomposition.
inline double dense_lambda2(const GridMap& m) {
    const auto nodes = empty_tiles(m);
    const int n = static_cast<int>(nodes.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (adjacent(m, nodes[i], nodes[j])) a(i, j) = 1.0;
        }
    }
    const Eigen::VectorXd deg = a.rowwise().sum();
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) l(i, j) -= a(i, j) / std::sqrt(deg[i] * deg[j]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
    return es.eigenvalues()[1];
}

/// Usage counts from one explicit BFS path per unordered pair (s < t), parents assigned by first
/// discovery in Up, Down, Left, Right order, interior tiles only.
inline std::vector<long> all_pairs_usage(const GridMap& m) {
    std::vector<long> usage(static_cast<std::size_t>(m.size()), 0);
    const auto nodes = empty_tiles(m);
    for (int s : nodes) {
        std::vector<int> parent(static_cast<std::size_t>(m.size()), -2);
        std::queue<int> q;
        q.push(s);
        parent[s] = -1;
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            const Cell c = m.cell(v);
            const Cell nbs[4] = {{c.row - 1, c.col}, {c.row + 1, c.col}, {c.row, c.col - 1}, {c.row, c.col + 1}};
            for (const Cell nb : nbs) {
                if (!m.in_bounds(nb) || m.at(nb) != Tile::Empty || parent[m.index(nb)] != -2) continue;
                parent[m.index(nb)] = v;
                q.push(m.index(nb));
            }
        }
        for (int t : nodes) {
            if (t <= s) continue;
            for (int v = parent[t]; v != s; v = parent[v]) ++usage[v];
        }
    }
    return usage;
}

inline double all_pairs_bc_std(const GridMap& m) {
    const auto usage = all_pairs_usage(m);
    const auto nodes = empty_tiles(m);
    double mean = 0.0;
    for (int v : nodes) mean += static_cast<double>(usage[v]);
    mean /= static_cast<double>(nodes.size());
    double var = 0.0;
    for (int v : nodes) var += (usage[v] - mean) * (usage[v] - mean);
    return std::sqrt(var / static_cast<double>(nodes.size()));
}

/// Window codes of all interior 3x3 windows, bit (3*dy + dx) set for an obstacle.
inline std::map<int, long> window_counts(const GridMap& m) {
    std::map<int, long> counts;
    for (int r = 0; r + 3 <= m.height(); ++r) {
        for (int c = 0; c + 3 <= m.width(); ++c) {
            int code = 0;
            for (int dy = 0; dy < 3; ++dy) {
                for (int dx = 0; dx < 3; ++dx) {
                    if (m.at(Cell{r + dy, c + dx}) == Tile::Obstacle) code += 1 << (3 * dy + dx);
                }
            }
            ++counts[code];
        }
    }
    return counts;
}

/// Normalize, add eps to each of the 512 bins, renormalize; then sum p log(p/q) over all bins.
inline double direct_tile_kl(const std::map<int, long>& pc, const std::map<int, long>& qc, double eps) {
    auto smooth = [&](const std::map<int, long>& c) {
        long total = 0;
        for (const auto& [k, v] : c) total += v;
        std::vector<double> p(512, eps);
        for (const auto& [k, v] : c) p[k] += static_cast<double>(v) / static_cast<double>(total);
        double s = 0.0;
        for (double x : p) s += x;
        for (double& x : p) x /= s;
        return p;
    };
    const auto p = smooth(pc), q = smooth(qc);
    double kl = 0.0;
    for (int k = 0; k < 512; ++k) kl += p[k] * std::log(p[k] / q[k]);
    return kl;
}

inline double direct_entropy(const GridMap& m) {
    const auto counts = window_counts(m);
    long total = 0;
    for (const auto& [k, v] : counts) total += v;
    double h = 0.0;
    for (const auto& [k, v] : counts) {
        const double p = static_cast<double>(v) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return h;
}

/// WL subtree features with integer relabeling shared between the two graphs. Labels are
/// compressed per iteration from (own label, sorted neighbor labels).
inline double wl_kl(const GridMap& a, const GridMap& b, int iterations, double eps) {
    const GridMap* maps[2] = {&a, &b};
    std::vector<std::vector<int>> label(2);
    std::map<std::pair<int, int>, long> hist[2];  // (iteration, label) -> count
    for (int g = 0; g < 2; ++g) {
        const GridMap& m = *maps[g];
        label[g].assign(static_cast<std::size_t>(m.size()), -1);
        for (int v : empty_tiles(m)) {
            int d = 0;
            for (int u : empty_tiles(m)) d += adjacent(m, u, v) ? 1 : 0;
            label[g][v] = d;
            ++hist[g][{0, d}];
        }
    }
    for (int it = 1; it <= iterations; ++it) {
        std::map<std::pair<int, std::vector<int>>, int> dict;
        std::vector<std::vector<int>> next(2);
        for (int g = 0; g < 2; ++g) {
            const GridMap& m = *maps[g];
            next[g].assign(static_cast<std::size_t>(m.size()), -1);
            for (int v : empty_tiles(m)) {
                std::vector<int> ms;
                for (int u : empty_tiles(m)) {
                    if (adjacent(m, u, v)) ms.push_back(label[g][u]);
                }
                std::sort(ms.begin(), ms.end());
                const auto key = std::make_pair(label[g][v], ms);
                auto found = dict.find(key);
                if (found == dict.end()) found = dict.emplace(key, static_cast<int>(dict.size())).first;
                next[g][v] = found->second;
                ++hist[g][{it, found->second}];
            }
        }
        label = next;
    }
    std::map<std::pair<int, int>, std::pair<double, double>> joint;
    for (int g = 0; g < 2; ++g) {
        long total = 0;
        for (const auto& [k, v] : hist[g]) total += v;
        for (const auto& [k, v] : hist[g]) {
            auto& slot = joint[k];
            (g == 0 ? slot.first : slot.second) = static_cast<double>(v) / static_cast<double>(total);
        }
    }
    double sp = 0.0, sq = 0.0;
    for (auto& [k, pq] : joint) {
        pq.first += eps;
        pq.second += eps;
        sp += pq.first;
        sq += pq.second;
    }
    double kl = 0.0;
    for (const auto& [k, pq] : joint) kl += pq.first / sp * std::log((pq.first / sp) / (pq.second / sq));
    return kl;
}

}  // namespace oracle
