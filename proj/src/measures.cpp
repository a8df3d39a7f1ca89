#include "mapgen/measures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include <Eigen/Dense>
#include <omp.h>

#include "mapgen/movingai.hpp"

namespace mapgen::measures {

std::array<double, kPatternCount> TilePatternDistribution::smoothed(double eps) const {
    std::array<double, kPatternCount> p{};
    double sum = 0.0;
    for (int k = 0; k < kPatternCount; ++k) {
        p[k] = (total_windows > 0 ? static_cast<double>(counts[k]) / static_cast<double>(total_windows) : 0.0) + eps;
        sum += p[k];
    }
    for (double& v : p) v /= sum;
    return p;
}

int count_obstacles(const GridMap& map) { return map.size() - map.count_empty(); }

TilePatternDistribution tile_pattern_distribution(const GridMap& map) {
    if (map.width() < 3 || map.height() < 3) throw MapError("tile patterns need a map of at least 3x3");
    TilePatternDistribution d;
    for (int r = 0; r + 2 < map.height(); ++r) {
        for (int c = 0; c + 2 < map.width(); ++c) {
            int code = 0;
            for (int k = 0; k < 9; ++k) {
                if (map.at(Cell{r + k / 3, c + k % 3}) == Tile::Obstacle) code |= 1 << k;
            }
            ++d.counts[code];
            ++d.total_windows;
        }
    }
    return d;
}

TilePatternDistribution build_reference(std::span<const GridMap> corpus) {
    if (corpus.empty()) throw MapError("reference corpus is empty");
    TilePatternDistribution pooled;
    for (const GridMap& m : corpus) {
        const auto d = tile_pattern_distribution(m);
        for (int k = 0; k < kPatternCount; ++k) pooled.counts[k] += d.counts[k];
        pooled.total_windows += d.total_windows;
    }
    return pooled;
}

double kl_divergence(const TilePatternDistribution& p, const TilePatternDistribution& q, double eps) {
    const auto ps = p.smoothed(eps);
    const auto qs = q.smoothed(eps);
    double kl = 0.0;
    for (int k = 0; k < kPatternCount; ++k) kl += ps[k] * std::log(ps[k] / qs[k]);
    return std::max(0.0, kl);
}

double kl_tile_pattern(const GridMap& map, const TilePatternDistribution& reference) {
    if (reference.total_windows == 0) throw MapError("reference distribution is empty");
    return kl_divergence(tile_pattern_distribution(map), reference);
}

double tile_entropy(const GridMap& map) {
    const auto d = tile_pattern_distribution(map);
    double h = 0.0;
    for (std::int64_t c : d.counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(d.total_windows);
        h -= p * std::log(p);
    }
    return std::max(0.0, h);
}

// ---------------------------------------------------------------------------------------------

namespace {

// BFS tree from `s` (parent = first discoverer, Up/Down/Left/Right order). For each tile v, adds
// the number of targets t > s whose tree path passes through v as an interior tile.
void accumulate_from_source(const GridMap& map, int s, std::vector<int>& parent, std::vector<int>& order,
                            std::vector<std::int64_t>& below, std::vector<std::int64_t>& usage) {
    std::fill(parent.begin(), parent.end(), -2);
    order.clear();
    order.push_back(s);
    parent[s] = -1;
    std::array<int, 4> nbs{};
    for (std::size_t head = 0; head < order.size(); ++head) {
        const int v = order[head];
        const int n = map.empty_neighbors(v, nbs);
        for (int k = 0; k < n; ++k) {
            if (parent[nbs[k]] == -2) {
                parent[nbs[k]] = v;
                order.push_back(nbs[k]);
            }
        }
    }
    for (int v : order) below[v] = 0;
    for (std::size_t k = order.size(); k-- > 1;) {
        const int v = order[k];
        const std::int64_t self = v > s ? 1 : 0;
        usage[v] += below[v];
        below[parent[v]] += below[v] + self;
    }
}

double population_std(const GridMap& map, const std::vector<std::int64_t>& usage) {
    double sum = 0.0;
    int n = 0;
    for (int i = 0; i < map.size(); ++i) {
        if (!map.is_empty(i)) continue;
        sum += static_cast<double>(usage[i]);
        ++n;
    }
    const double mean = sum / n;
    double var = 0.0;
    for (int i = 0; i < map.size(); ++i) {
        if (!map.is_empty(i)) continue;
        const double d = static_cast<double>(usage[i]) - mean;
        var += d * d;
    }
    return std::sqrt(var / n);
}

}  // namespace

std::vector<std::int64_t> betweenness_usage(const GridMap& map) {
    const auto n = static_cast<std::size_t>(map.size());
    std::vector<std::int64_t> usage(n, 0), below(n, 0);
    std::vector<int> parent(n), order;
    for (int s = 0; s < map.size(); ++s) {
        if (map.is_empty(s)) accumulate_from_source(map, s, parent, order, below, usage);
    }
    return usage;
}

std::vector<std::int64_t> betweenness_usage_parallel(const GridMap& map, int threads) {
    const auto n = static_cast<std::size_t>(map.size());
    std::vector<std::int64_t> usage(n, 0);
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel num_threads(nthreads)
    {
        std::vector<std::int64_t> local(n, 0), below(n, 0);
        std::vector<int> parent(n), order;
#pragma omp for schedule(dynamic, 8)
        for (int s = 0; s < map.size(); ++s) {
            if (map.is_empty(s)) accumulate_from_source(map, s, parent, order, below, local);
        }
#pragma omp critical
        for (std::size_t i = 0; i < n; ++i) usage[i] += local[i];
    }
    return usage;
}

double betweenness_std(const GridMap& map) {
    if (!is_valid(map)) throw MapError("betweenness requires a valid map");
    return population_std(map, betweenness_usage_parallel(map));
}

// ---------------------------------------------------------------------------------------------

double lambda2(const GridMap& map) {
    if (!is_valid(map)) throw MapError("lambda2 requires a valid map");
    std::vector<int> nodes;
    std::vector<int> id(static_cast<std::size_t>(map.size()), -1);
    for (int i = 0; i < map.size(); ++i) {
        if (map.is_empty(i)) {
            id[i] = static_cast<int>(nodes.size());
            nodes.push_back(i);
        }
    }
    const int n = static_cast<int>(nodes.size());
    if (n < 2) throw MapError("lambda2 needs at least two Empty tiles");

    std::vector<std::array<int, 4>> adj(static_cast<std::size_t>(n));
    std::vector<int> deg(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        std::array<int, 4> nbs{};
        deg[v] = map.empty_neighbors(nodes[v], nbs);
        for (int k = 0; k < deg[v]; ++k) adj[v][k] = id[nbs[k]];
    }
    Eigen::VectorXd inv_sqrt_deg(n);
    Eigen::VectorXd top(n);
    for (int v = 0; v < n; ++v) {
        inv_sqrt_deg[v] = 1.0 / std::sqrt(static_cast<double>(deg[v]));
        top[v] = std::sqrt(static_cast<double>(deg[v]));
    }
    top.normalize();

    // Normalized adjacency M = D^-1/2 A D^-1/2; lambda2(L) = 1 - (largest eigenvalue of M on top^perp).
    auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        for (int v = 0; v < n; ++v) {
            double s = 0.0;
            for (int k = 0; k < deg[v]; ++k) s += inv_sqrt_deg[adj[v][k]] * x[adj[v][k]];
            y[v] = inv_sqrt_deg[v] * s;
        }
    };

    // Lanczos with full reorthogonalization, deflating the known top eigenvector.
    const int max_steps = n - 1;
    Eigen::MatrixXd basis(n, max_steps + 1);
    std::vector<double> alpha, beta;
    std::mt19937_64 rng(0x5EEDULL);
    Eigen::VectorXd q(n);
    for (int v = 0; v < n; ++v) q[v] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    q -= top.dot(q) * top;
    q.normalize();
    basis.col(0) = q;
    Eigen::VectorXd z(n);
    double estimate = -2.0;
    for (int j = 0; j < max_steps; ++j) {
        apply(basis.col(j), z);
        const double a = basis.col(j).dot(z);
        alpha.push_back(a);
        z -= top.dot(z) * top;
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= j; ++i) z -= basis.col(i).dot(z) * basis.col(i);
        }
        const double b = z.norm();

        const int m = j + 1;
        const bool last = m == max_steps || b < 1e-12;
        if (last || m % 8 == 0) {
            Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
            Eigen::VectorXd sub(std::max(m - 1, 0));
            for (int i = 0; i + 1 < m; ++i) sub[i] = beta[i];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
            tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            const double ritz = tri.eigenvalues()[m - 1];
            const double residual = std::abs(b * tri.eigenvectors()(m - 1, m - 1));
            estimate = ritz;
            if (last || residual < 1e-11) break;
        }
        beta.push_back(b);
        basis.col(j + 1) = z / b;
    }
    return std::clamp(1.0 - estimate, 0.0, 2.0);
}

// ---------------------------------------------------------------------------------------------

WlHistogram& WlHistogram::operator+=(const WlHistogram& other) {
    for (const auto& [label, c] : other.counts) counts[label] += c;
    total += other.total;
    return *this;
}

WlHistogram wl_histogram(const GridMap& map, int iterations) {
    std::vector<int> nodes;
    for (int i = 0; i < map.size(); ++i) {
        if (map.is_empty(i)) nodes.push_back(i);
    }
    std::vector<std::string> label(static_cast<std::size_t>(map.size()));
    std::array<int, 4> nbs{};
    WlHistogram h;
    for (int v : nodes) {
        label[v] = std::to_string(map.empty_neighbors(v, nbs));
        ++h.counts["0:" + label[v]];
        ++h.total;
    }
    for (int it = 1; it <= iterations; ++it) {
        std::vector<std::string> next(label.size());
        for (int v : nodes) {
            const int n = map.empty_neighbors(v, nbs);
            std::vector<std::string> ms;
            for (int k = 0; k < n; ++k) ms.push_back(label[nbs[k]]);
            std::sort(ms.begin(), ms.end());
            std::string s = label[v] + "(";
            for (std::size_t k = 0; k < ms.size(); ++k) {
                if (k) s += ',';
                s += ms[k];
            }
            s += ')';
            next[v] = std::move(s);
        }
        label = std::move(next);
        for (int v : nodes) {
            ++h.counts[std::to_string(it) + ":" + label[v]];
            ++h.total;
        }
    }
    return h;
}

double wl_kl(const WlHistogram& p, const WlHistogram& q, double eps) {
    std::map<std::string, std::pair<double, double>> joint;
    for (const auto& [l, c] : p.counts) joint[l].first = static_cast<double>(c) / static_cast<double>(p.total);
    for (const auto& [l, c] : q.counts) joint[l].second = static_cast<double>(c) / static_cast<double>(q.total);
    double sp = 0.0, sq = 0.0;
    for (auto& [l, pq] : joint) {
        pq.first += eps;
        pq.second += eps;
        sp += pq.first;
        sq += pq.second;
    }
    double kl = 0.0;
    for (const auto& [l, pq] : joint) {
        const double a = pq.first / sp;
        const double b = pq.second / sq;
        kl += a * std::log(a / b);
    }
    return std::max(0.0, kl);
}

double wl_feature_kl(const GridMap& map, const GridMap& reference, int iterations) {
    if (!is_valid(map) || !is_valid(reference)) throw MapError("WL features require valid maps");
    return wl_kl(wl_histogram(map, iterations), wl_histogram(reference, iterations));
}

// ---------------------------------------------------------------------------------------------

std::vector<GridMap> load_corpus(const std::string& directory) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(directory)) {
        if (e.is_regular_file() && e.path().extension() == ".map") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<GridMap> maps;
    for (const auto& f : files) maps.push_back(load_map_file(f.string()));
    if (maps.empty()) throw MapError("no .map files in " + directory);
    return maps;
}

std::vector<GridMap> bundled_reference_corpus() { return load_corpus(std::string(MAPGEN_DATA_DIR) + "/reference"); }

}  // namespace mapgen::measures
