#pragma once

#include "mapgen/grid_map.hpp"

namespace mapgen {

/// Deterministic greedy repair: keep the largest Empty component, then open obstacles next to it
/// while there are more than `max_obstacles`, then close non-articulation Empty tiles while there
/// are fewer than `min_obstacles`. A map that is already valid and in range is returned unchanged.
/// Requires 0 <= min_obstacles <= max_obstacles <= width*height - 1.
GridMap repair(const GridMap& raw, int min_obstacles, int max_obstacles);

/// Fraction of positions with equal tiles.
double similarity(const GridMap& a, const GridMap& b);

}  // namespace mapgen
