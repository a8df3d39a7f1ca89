#pragma once

#include <cstdint>
#include <vector>

#include "mapgen/grid_map.hpp"

namespace mapgen {

struct AgentTask {
    Cell start;
    Cell goal;

    friend bool operator==(const AgentTask&, const AgentTask&) = default;
};

/// A map plus ordered start/goal pairs. Starts are pairwise distinct, goals are pairwise distinct,
/// and every endpoint is Empty. Construction checks these.
class MapfInstance {
public:
    MapfInstance(GridMap map, std::vector<AgentTask> agents);

    const GridMap& map() const noexcept { return map_; }
    const std::vector<AgentTask>& agents() const noexcept { return agents_; }
    int num_agents() const noexcept { return static_cast<int>(agents_.size()); }

    int start_index(int agent) const { return map_.index(agents_[static_cast<std::size_t>(agent)].start); }
    int goal_index(int agent) const { return map_.index(agents_[static_cast<std::size_t>(agent)].goal); }

    friend bool operator==(const MapfInstance&, const MapfInstance&) = default;

private:
    GridMap map_;
    std::vector<AgentTask> agents_;
};

struct BucketOptions {
    int min_distance = 4;
    int bucket_width = 4;
    int attempts_per_agent = 1000;
};

/// Bucket-method instance generation: start/goal pairs with BFS distance >= min_distance are
/// assigned round-robin to distance buckets so occupied-bucket counts differ by at most one.
/// Deterministic for fixed (map, n_agents, seed, options).
MapfInstance generate_instance(const GridMap& map, int n_agents, std::uint64_t seed,
                               const BucketOptions& options = {});

}  // namespace mapgen
