#pragma once

#include <optional>

#include "mapgen/solvers.hpp"

namespace mapgen::detail {

inline int at_time(const IndexPath& p, int t) {
    return t < static_cast<int>(p.size()) ? p[static_cast<std::size_t>(t)] : p.back();
}

/// Earliest conflict between two agents' paths, padding the shorter with goal waits.
struct PairConflict {
    int timestep = 0;
    int agent_a = 0;  // agent_a < agent_b
    int agent_b = 0;
    bool edge = false;

    friend bool operator<(const PairConflict& x, const PairConflict& y) {
        if (x.timestep != y.timestep) return x.timestep < y.timestep;
        if (x.agent_a != y.agent_a) return x.agent_a < y.agent_a;
        return x.agent_b < y.agent_b;
    }
};

inline std::optional<PairConflict> first_conflict(const IndexPath& pa, const IndexPath& pb, int a, int b) {
    const int horizon = static_cast<int>(std::max(pa.size(), pb.size()));
    for (int t = 0; t < horizon; ++t) {
        const int la = at_time(pa, t);
        const int lb = at_time(pb, t);
        if (la == lb) return PairConflict{t, std::min(a, b), std::max(a, b), false};
        if (t > 0 && la == at_time(pb, t - 1) && lb == at_time(pa, t - 1)) {
            return PairConflict{t, std::min(a, b), std::max(a, b), true};
        }
    }
    return std::nullopt;
}

}  // namespace mapgen::detail
