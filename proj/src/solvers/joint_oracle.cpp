#include <functional>
#include <queue>
#include <unordered_map>

#include "mapgen/solvers.hpp"

namespace mapgen {

// Joint configuration: each agent's empty-tile slot plus a mask of agents that have finished
// (parked on their goal for good). Moving agents pay 1 per timestep; finishing is free, so the
// cheapest route to the all-finished state is the optimal sum of costs.
std::optional<long> joint_state_oracle(const MapfInstance& instance, long cost_bound) {
    const GridMap& map = instance.map();
    const int k = instance.num_agents();
    if (k > 3) throw MapError("joint-state oracle supports at most 3 agents");
    std::vector<int> slot(static_cast<std::size_t>(map.size()), -1);
    std::vector<int> tile_of;
    for (int i = 0; i < map.size(); ++i) {
        if (map.is_empty(i)) {
            slot[static_cast<std::size_t>(i)] = static_cast<int>(tile_of.size());
            tile_of.push_back(i);
        }
    }
    const int n_empty = static_cast<int>(tile_of.size());
    if (n_empty > 36) throw MapError("joint-state oracle supports at most 36 empty tiles");
    if (k == 0) return 0L;

    // Neighbor lists in slot space, wait first.
    std::vector<std::vector<int>> moves(static_cast<std::size_t>(n_empty));
    std::array<int, 4> nbs{};
    for (int s = 0; s < n_empty; ++s) {
        moves[static_cast<std::size_t>(s)].push_back(s);
        const int cnt = map.empty_neighbors(tile_of[static_cast<std::size_t>(s)], nbs);
        for (int j = 0; j < cnt; ++j) moves[static_cast<std::size_t>(s)].push_back(slot[static_cast<std::size_t>(nbs[static_cast<std::size_t>(j)])]);
    }
    std::vector<int> goal(static_cast<std::size_t>(k));
    std::array<int, 3> start{};
    for (int a = 0; a < k; ++a) {
        start[static_cast<std::size_t>(a)] = slot[static_cast<std::size_t>(instance.start_index(a))];
        goal[static_cast<std::size_t>(a)] = slot[static_cast<std::size_t>(instance.goal_index(a))];
    }

    auto encode = [&](const std::array<int, 3>& locs, int mask) {
        std::uint64_t key = static_cast<std::uint64_t>(mask);
        for (int a = 0; a < k; ++a) key = key * 64 + static_cast<std::uint64_t>(locs[static_cast<std::size_t>(a)]);
        return key;
    };
    struct State {
        long cost;
        std::array<int, 3> locs;
        int mask;
    };
    auto worse = [](const State& x, const State& y) { return x.cost > y.cost; };
    std::priority_queue<State, std::vector<State>, decltype(worse)> frontier(worse);
    std::unordered_map<std::uint64_t, long> best;
    const int all_done = (1 << k) - 1;

    auto relax = [&](const std::array<int, 3>& locs, int mask, long cost) {
        if (cost > cost_bound) return;
        const auto key = encode(locs, mask);
        auto [it, inserted] = best.try_emplace(key, cost);
        if (!inserted) {
            if (it->second <= cost) return;
            it->second = cost;
        }
        frontier.push({cost, locs, mask});
    };
    relax(start, 0, 0);

    while (!frontier.empty()) {
        const State s = frontier.top();
        frontier.pop();
        if (best[encode(s.locs, s.mask)] < s.cost) continue;
        if (s.mask == all_done) return s.cost;

        for (int a = 0; a < k; ++a) {
            const int bit = 1 << a;
            if (!(s.mask & bit) && s.locs[static_cast<std::size_t>(a)] == goal[static_cast<std::size_t>(a)]) {
                relax(s.locs, s.mask | bit, s.cost);
            }
        }

        int moving = 0;
        for (int a = 0; a < k; ++a) moving += (s.mask >> a & 1) ? 0 : 1;
        std::array<int, 3> next = s.locs;
        std::function<void(int)> assign = [&](int a) {
            if (a == k) {
                for (int x = 0; x < k; ++x) {
                    for (int y = x + 1; y < k; ++y) {
                        const auto ux = static_cast<std::size_t>(x);
                        const auto uy = static_cast<std::size_t>(y);
                        if (next[ux] == next[uy]) return;
                        if (next[ux] == s.locs[uy] && next[uy] == s.locs[ux] && next[ux] != s.locs[ux]) return;
                    }
                }
                relax(next, s.mask, s.cost + moving);
                return;
            }
            if (s.mask >> a & 1) {
                next[static_cast<std::size_t>(a)] = s.locs[static_cast<std::size_t>(a)];
                assign(a + 1);
                return;
            }
            for (int m : moves[static_cast<std::size_t>(s.locs[static_cast<std::size_t>(a)])]) {
                next[static_cast<std::size_t>(a)] = m;
                assign(a + 1);
            }
        };
        assign(0);
    }
    return std::nullopt;
}

}  // namespace mapgen
