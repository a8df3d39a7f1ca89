#include "mapgen/instance.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "mapgen/rng.hpp"

namespace mapgen {

MapfInstance::MapfInstance(GridMap map, std::vector<AgentTask> agents)
    : map_(std::move(map)), agents_(std::move(agents)) {
    std::set<Cell> starts;
    std::set<Cell> goals;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const auto& a = agents_[i];
        if (!map_.is_empty(a.start) || !map_.is_empty(a.goal)) {
            throw MapError("agent " + std::to_string(i) + " has an endpoint off the map or on an obstacle");
        }
        if (!starts.insert(a.start).second) {
            throw MapError("agent " + std::to_string(i) + " shares its start with another agent");
        }
        if (!goals.insert(a.goal).second) {
            throw MapError("agent " + std::to_string(i) + " shares its goal with another agent");
        }
    }
}

namespace {

// Index pool with O(1) swap-removal. Iteration order depends only on the removal sequence.
class Pool {
public:
    explicit Pool(int n) : items_(static_cast<std::size_t>(n)), pos_(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) {
            items_[static_cast<std::size_t>(i)] = i;
            pos_[static_cast<std::size_t>(i)] = i;
        }
    }
    bool contains(int v) const { return pos_[static_cast<std::size_t>(v)] >= 0; }
    int size() const { return static_cast<int>(items_.size()); }
    int operator[](int k) const { return items_[static_cast<std::size_t>(k)]; }
    void remove(int v) {
        const int p = pos_[static_cast<std::size_t>(v)];
        const int last = items_.back();
        items_[static_cast<std::size_t>(p)] = last;
        pos_[static_cast<std::size_t>(last)] = p;
        items_.pop_back();
        pos_[static_cast<std::size_t>(v)] = -1;
    }

private:
    std::vector<int> items_;
    std::vector<int> pos_;
};

}  // namespace

MapfInstance generate_instance(const GridMap& map, int n_agents, std::uint64_t seed,
                               const BucketOptions& options) {
    if (n_agents < 0) throw MapError("agent count must be nonnegative");
    if (!is_valid(map)) throw MapError("instance generation requires a valid map");
    if (options.bucket_width < 1 || options.min_distance < 1) {
        throw MapError("bucket width and minimum distance must be positive");
    }

    std::vector<int> empties;
    for (int i = 0; i < map.size(); ++i) {
        if (map.is_empty(i)) empties.push_back(i);
    }
    const int n_empty = static_cast<int>(empties.size());
    if (n_empty < 2 * n_agents) {
        throw MapError("map has " + std::to_string(n_empty) + " empty tiles, need at least " +
                       std::to_string(2 * n_agents));
    }
    if (n_agents == 0) return MapfInstance(map, {});

    // All-pairs distances between empty tiles, indexed by position in `empties`.
    std::vector<int> dist(static_cast<std::size_t>(n_empty) * static_cast<std::size_t>(n_empty));
    int diameter = 0;
    for (int a = 0; a < n_empty; ++a) {
        const DistanceField f = bfs_distances(map, empties[static_cast<std::size_t>(a)]);
        for (int b = 0; b < n_empty; ++b) {
            const int d = f[empties[static_cast<std::size_t>(b)]];
            dist[static_cast<std::size_t>(a) * n_empty + b] = d;
            diameter = std::max(diameter, d);
        }
    }
    auto d_of = [&](int a, int b) { return dist[static_cast<std::size_t>(a) * n_empty + b]; };

    const int width = options.bucket_width;
    const int min_d = options.min_distance;
    if (diameter < min_d) {
        throw MapError("no start/goal pair reaches the minimum distance " + std::to_string(min_d));
    }
    // Every distance between min_d and the diameter occurs on some shortest path, so each of
    // these buckets is nonempty before any tiles are consumed.
    std::vector<int> rotation;
    for (int b = min_d / width; b <= diameter / width; ++b) rotation.push_back(b);

    std::mt19937_64 rng(seed);
    Pool starts(n_empty);
    Pool goals(n_empty);
    std::vector<AgentTask> agents;
    agents.reserve(static_cast<std::size_t>(n_agents));

    const long long budget = static_cast<long long>(options.attempts_per_agent) * n_agents;
    long long attempts = 0;
    std::size_t cursor = 0;
    std::vector<int> candidates;

    auto goals_in_bucket = [&](int s, int lo, int hi) {
        candidates.clear();
        for (int g = 0; g < n_empty; ++g) {
            if (g == s || !goals.contains(g)) continue;
            const int d = d_of(s, g);
            if (d >= lo && d <= hi) candidates.push_back(g);
        }
    };

    while (static_cast<int>(agents.size()) < n_agents) {
        if (rotation.empty()) throw MapError("bucket fill infeasible: every distance bucket exhausted");
        const int bucket = rotation[cursor];
        const int lo = std::max(min_d, bucket * width);
        const int hi = bucket * width + width - 1;

        int chosen_start = -1;
        int chosen_goal = -1;
        int fail_streak = 0;
        while (chosen_start < 0) {
            if (++attempts > budget) {
                throw MapError("bucket fill infeasible after " + std::to_string(budget) + " attempts");
            }
            if (fail_streak < 32) {
                const int s = starts[static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(starts.size())))];
                goals_in_bucket(s, lo, hi);
                if (candidates.empty()) {
                    ++fail_streak;
                    continue;
                }
                chosen_start = s;
                chosen_goal = candidates[uniform_below(rng, candidates.size())];
                break;
            }
            // Rare bucket: restrict sampling to starts that still have a goal in range.
            std::vector<int> feasible;
            for (int k = 0; k < starts.size(); ++k) {
                goals_in_bucket(starts[k], lo, hi);
                if (!candidates.empty()) feasible.push_back(starts[k]);
            }
            if (feasible.empty()) break;
            std::sort(feasible.begin(), feasible.end());
            chosen_start = feasible[uniform_below(rng, feasible.size())];
            goals_in_bucket(chosen_start, lo, hi);
            chosen_goal = candidates[uniform_below(rng, candidates.size())];
        }

        if (chosen_start < 0) {
            rotation.erase(rotation.begin() + static_cast<std::ptrdiff_t>(cursor));
            if (cursor >= rotation.size()) cursor = 0;
            continue;
        }
        starts.remove(chosen_start);
        goals.remove(chosen_goal);
        agents.push_back({map.cell(empties[static_cast<std::size_t>(chosen_start)]),
                          map.cell(empties[static_cast<std::size_t>(chosen_goal)])});
        cursor = (cursor + 1) % rotation.size();
    }
    return MapfInstance(map, std::move(agents));
}

}  // namespace mapgen
