#pragma once

#include <algorithm>
#include <random>

#include "mapgen/solvers.hpp"
#include "oracles.hpp"

namespace oracle {

/// Random feasible instance: 2-3 agents with distinct starts and goals on a valid map of at
/// most 6x6 with at most 8 obstacles. Infeasible draws (no joint solution) are rejected.
inline mapgen::MapfInstance random_small_instance(std::mt19937_64& rng) {
    for (;;) {
        const int w = 2 + static_cast<int>(rng() % 5), h = 2 + static_cast<int>(rng() % 5);
        const GridMap m = random_valid_map(rng, w, h, 0.2);
        const auto tiles = empty_tiles(m);
        const int k = 2 + static_cast<int>(rng() % 2);
        if (static_cast<int>(tiles.size()) < k + 1 || m.size() - m.count_empty() > 8) continue;
        std::vector<int> s = tiles, g = tiles;
        std::shuffle(s.begin(), s.end(), rng);
        std::shuffle(g.begin(), g.end(), rng);
        std::vector<mapgen::AgentTask> agents;
        for (int a = 0; a < k; ++a) agents.push_back({m.cell(s[a]), m.cell(g[a])});
        mapgen::MapfInstance inst(m, agents);
        if (mapgen::joint_state_oracle(inst)) return inst;
    }
}

}  // namespace oracle
