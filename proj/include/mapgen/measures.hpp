#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mapgen/grid_map.hpp"

namespace mapgen::measures {

inline constexpr int kPatternCount = 512;
/// Added to every bin of a normalized distribution before renormalizing, for KL divergences.
inline constexpr double kSmoothing = 1e-6;

/// Counts of 3x3 tile patterns over all fully interior windows. Bit k of a pattern code is the
/// tile at window position k (row-major), Obstacle = 1.
struct TilePatternDistribution {
    std::array<std::int64_t, kPatternCount> counts{};
    std::int64_t total_windows = 0;

    std::array<double, kPatternCount> smoothed(double eps = kSmoothing) const;
};

int count_obstacles(const GridMap& map);

TilePatternDistribution tile_pattern_distribution(const GridMap& map);
TilePatternDistribution build_reference(std::span<const GridMap> corpus);

/// KL(p || q) between smoothed pattern distributions, natural log.
double kl_divergence(const TilePatternDistribution& p, const TilePatternDistribution& q, double eps = kSmoothing);
double kl_tile_pattern(const GridMap& map, const TilePatternDistribution& reference);

/// Shannon entropy (natural log) of the unsmoothed pattern distribution.
double tile_entropy(const GridMap& map);

/// Per-tile interior usage over one BFS shortest path per unordered pair of Empty tiles.
/// Serial reference implementation.
std::vector<std::int64_t> betweenness_usage(const GridMap& map);
/// OpenMP version over BFS sources; bit-identical to the serial one. threads <= 0 uses the default.
std::vector<std::int64_t> betweenness_usage_parallel(const GridMap& map, int threads = 0);
/// Population standard deviation of usage over Empty tiles.
double betweenness_std(const GridMap& map);

/// Second-smallest eigenvalue of the symmetric normalized Laplacian of the Empty-tile graph.
double lambda2(const GridMap& map);

/// Weisfeiler-Lehman label histogram over iterations 0..h (initial label = degree).
struct WlHistogram {
    std::map<std::string, std::int64_t> counts;
    std::int64_t total = 0;

    WlHistogram& operator+=(const WlHistogram& other);
};

WlHistogram wl_histogram(const GridMap& map, int iterations = 3);
double wl_kl(const WlHistogram& p, const WlHistogram& q, double eps = kSmoothing);
double wl_feature_kl(const GridMap& map, const GridMap& reference, int iterations = 3);

/// Maps under data/reference bundled with the source tree.
std::vector<GridMap> bundled_reference_corpus();
/// Every `.map` file in `directory`, sorted by file name.
std::vector<GridMap> load_corpus(const std::string& directory);

}  // namespace mapgen::measures
