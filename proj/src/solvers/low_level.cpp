#include <algorithm>
#include <cstdlib>
#include <limits>
#include <functional>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "mapgen/solvers.hpp"

namespace mapgen {

namespace {

constexpr int kNever = std::numeric_limits<int>::max();

std::uint64_t vkey(int loc, int t) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)) << 32) | static_cast<std::uint32_t>(loc);
}

std::uint64_t ekey(int from, int to, int t) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)) << 42) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 21) | static_cast<std::uint32_t>(to);
}

// Reservation state for one query. Beyond `static_time` nothing changes any more, so states with
// later timesteps are merged for duplicate detection.
struct Tables {
    std::unordered_set<std::uint64_t> vertex;
    std::unordered_set<std::uint64_t> edge;
    std::vector<int> blocked_from;
    std::unordered_map<std::uint64_t, int> soft_vertex;
    std::unordered_map<std::uint64_t, int> soft_edge;
    std::vector<int> soft_parked_from;
    int goal_free_after = 0;
    int static_time = 0;
};

Tables build_tables(const MapfInstance& instance, const LowLevelQuery& q) {
    const int n = instance.map().size();
    const int goal = instance.goal_index(q.agent);
    Tables tab;
    tab.blocked_from.assign(static_cast<std::size_t>(n), kNever);
    tab.soft_parked_from.assign(static_cast<std::size_t>(n), kNever);
    int latest = 0;

    for (const Constraint& c : q.constraints) {
        if (c.agent != q.agent) continue;
        latest = std::max(latest, c.timestep);
        switch (c.kind) {
        case Constraint::Kind::Vertex:
            tab.vertex.insert(vkey(c.location, c.timestep));
            if (c.location == goal) tab.goal_free_after = std::max(tab.goal_free_after, c.timestep + 1);
            break;
        case Constraint::Kind::Edge:
            tab.edge.insert(ekey(c.location, c.to_location, c.timestep));
            break;
        case Constraint::Kind::Range:
            if (c.until == Constraint::kForever) {
                auto& b = tab.blocked_from[static_cast<std::size_t>(c.location)];
                b = std::min(b, c.timestep);
            } else {
                latest = std::max(latest, c.until);
                for (int t = c.timestep; t <= c.until; ++t) tab.vertex.insert(vkey(c.location, t));
                if (c.location == goal) tab.goal_free_after = std::max(tab.goal_free_after, c.until + 1);
            }
            break;
        case Constraint::Kind::Length:
            tab.goal_free_after = std::max(tab.goal_free_after, c.timestep);
            break;
        }
    }
    for (const IndexPath* p : q.hard_paths) {
        const int len = static_cast<int>(p->size());
        latest = std::max(latest, len);
        for (int t = 0; t + 1 < len; ++t) {
            const int loc = (*p)[static_cast<std::size_t>(t)];
            tab.vertex.insert(vkey(loc, t));
            if (loc == goal) tab.goal_free_after = std::max(tab.goal_free_after, t + 1);
        }
        for (int t = 1; t < len; ++t) {
            // Moving into the other agent's previous cell while it moves into ours is a swap.
            tab.edge.insert(ekey((*p)[static_cast<std::size_t>(t)], (*p)[static_cast<std::size_t>(t - 1)], t));
        }
        auto& b = tab.blocked_from[static_cast<std::size_t>(p->back())];
        b = std::min(b, len - 1);
    }
    for (const IndexPath* p : q.soft_paths) {
        const int len = static_cast<int>(p->size());
        latest = std::max(latest, len);
        for (int t = 0; t + 1 < len; ++t) ++tab.soft_vertex[vkey((*p)[static_cast<std::size_t>(t)], t)];
        for (int t = 1; t < len; ++t) {
            ++tab.soft_edge[ekey((*p)[static_cast<std::size_t>(t)], (*p)[static_cast<std::size_t>(t - 1)], t)];
        }
        auto& b = tab.soft_parked_from[static_cast<std::size_t>(p->back())];
        b = std::min(b, len - 1);
    }
    tab.static_time = latest + 1;
    return tab;
}

struct Node {
    int loc;
    int g;
    int h;
    int conflicts;
    int parent;
    bool open;
    int f() const { return g + h; }
};

}  // namespace

std::optional<LowLevelPath> low_level_search(const MapfInstance& instance, const LowLevelQuery& q,
                                             const Deadline* deadline) {
    const GridMap& map = instance.map();
    const int start = instance.start_index(q.agent);
    const int goal = instance.goal_index(q.agent);
    const int horizon = 2 * map.size();
    const double w = std::max(1.0, q.focal_w);

    std::vector<int> own_h;
    const std::vector<int>* hfield = q.heuristic;
    if (hfield == nullptr) {
        own_h = bfs_distances(map, goal).dist;
        hfield = &own_h;
    }
    if ((*hfield)[static_cast<std::size_t>(start)] == kUnreachable) return std::nullopt;

    const Tables tab = build_tables(instance, q);
    if (tab.blocked_from[static_cast<std::size_t>(goal)] != kNever) return std::nullopt;
    if (tab.vertex.count(vkey(start, 0)) != 0 || tab.blocked_from[static_cast<std::size_t>(start)] == 0) {
        return std::nullopt;
    }

    auto heuristic = [&](int loc, int g) {
        return std::max((*hfield)[static_cast<std::size_t>(loc)], tab.goal_free_after - g);
    };

    std::vector<Node> nodes;
    nodes.reserve(1024);
    auto open_cmp = [&nodes](int a, int b) {
        const Node& x = nodes[static_cast<std::size_t>(a)];
        const Node& y = nodes[static_cast<std::size_t>(b)];
        if (x.f() != y.f()) return x.f() < y.f();
        return a < b;
    };
    auto focal_cmp = [&nodes](int a, int b) {
        const Node& x = nodes[static_cast<std::size_t>(a)];
        const Node& y = nodes[static_cast<std::size_t>(b)];
        if (x.conflicts != y.conflicts) return x.conflicts < y.conflicts;
        if (x.f() != y.f()) return x.f() < y.f();
        if (x.h != y.h) return x.h < y.h;
        return a < b;
    };
    std::set<int, decltype(open_cmp)> open(open_cmp);
    std::set<int, decltype(focal_cmp)> focal(focal_cmp);
    std::unordered_map<std::uint64_t, int> seen;

    auto soft_cost = [&](int from, int to, int t) {
        int c = 0;
        if (!tab.soft_vertex.empty()) {
            if (auto it = tab.soft_vertex.find(vkey(to, t)); it != tab.soft_vertex.end()) c += it->second;
            if (auto it = tab.soft_edge.find(ekey(from, to, t)); it != tab.soft_edge.end()) c += it->second;
        }
        if (t >= tab.soft_parked_from[static_cast<std::size_t>(to)]) ++c;
        return c;
    };

    double focal_bound = 0.0;
    auto push = [&](int idx) {
        nodes[static_cast<std::size_t>(idx)].open = true;
        open.insert(idx);
        if (nodes[static_cast<std::size_t>(idx)].f() <= focal_bound + 1e-9) focal.insert(idx);
    };

    nodes.push_back({start, 0, heuristic(start, 0), 0, -1, false});
    seen.emplace(vkey(start, 0), 0);
    focal_bound = w * nodes[0].f();
    push(0);

    std::array<int, 4> nbs{};
    long expansions = 0;
    while (!open.empty()) {
        if (deadline != nullptr && (++expansions & 255) == 0 && deadline->expired()) return std::nullopt;

        const int f_min = nodes[static_cast<std::size_t>(*open.begin())].f();
        const int cur = *focal.begin();
        focal.erase(focal.begin());
        open.erase(cur);
        Node& node = nodes[static_cast<std::size_t>(cur)];
        node.open = false;

        if (node.loc == goal && node.g >= tab.goal_free_after) {
            // Walk the parent chain; ancestors re-reached earlier in the time-invariant region
            // can make the chain shorter than node.g, and it is still valid there.
            LowLevelPath out;
            for (int k = cur; k >= 0; k = nodes[static_cast<std::size_t>(k)].parent) {
                out.path.push_back(nodes[static_cast<std::size_t>(k)].loc);
            }
            std::reverse(out.path.begin(), out.path.end());
            out.cost = static_cast<int>(out.path.size()) - 1;
            out.lower_bound = std::min(f_min, out.cost);
            out.conflicts = node.conflicts;
            return out;
        }

        const int loc = node.loc;
        const int t = node.g + 1;
        const int parent_conflicts = node.conflicts;
        if (t <= horizon) {
            const int n_nb = map.empty_neighbors(loc, nbs);
            for (int k = 0; k <= n_nb; ++k) {
                const int next = k < n_nb ? nbs[static_cast<std::size_t>(k)] : loc;
                if (t >= tab.blocked_from[static_cast<std::size_t>(next)]) continue;
                if (tab.vertex.count(vkey(next, t)) != 0) continue;
                if (next != loc && tab.edge.count(ekey(loc, next, t)) != 0) continue;

                const int conflicts = parent_conflicts + soft_cost(loc, next, t);
                const std::uint64_t key = vkey(next, std::min(t, tab.static_time));
                auto [it, inserted] = seen.try_emplace(key, static_cast<int>(nodes.size()));
                if (inserted) {
                    nodes.push_back({next, t, heuristic(next, t), conflicts, cur, false});
                    push(it->second);
                    continue;
                }
                const int idx = it->second;
                Node& old = nodes[static_cast<std::size_t>(idx)];
                if (t < old.g || (t == old.g && conflicts < old.conflicts)) {
                    if (old.open) {
                        open.erase(idx);
                        focal.erase(idx);
                    }
                    old.g = t;
                    old.h = heuristic(next, t);
                    old.conflicts = conflicts;
                    old.parent = cur;
                    push(idx);
                }
            }
        }

        if (open.empty()) break;
        const int new_min = nodes[static_cast<std::size_t>(*open.begin())].f();
        if (w * new_min > focal_bound + 1e-9) {
            const double new_bound = w * new_min;
            for (int idx : open) {
                const int f = nodes[static_cast<std::size_t>(idx)].f();
                if (f > new_bound + 1e-9) break;
                if (f > focal_bound + 1e-9) focal.insert(idx);
            }
            focal_bound = new_bound;
        }
        if (focal.empty()) {
            // Keep the f_min node selectable.
            focal.insert(*open.begin());
        }
    }
    return std::nullopt;
}

Mdd build_mdd(const MapfInstance& instance, const LowLevelQuery& q, int cost) {
    const GridMap& map = instance.map();
    const int start = instance.start_index(q.agent);
    const int goal = instance.goal_index(q.agent);
    LowLevelQuery own;
    own.agent = q.agent;
    own.constraints = q.constraints;
    const Tables tab = build_tables(instance, own);
    if (cost < 0 || cost < tab.goal_free_after || tab.blocked_from[static_cast<std::size_t>(goal)] != kNever) return {};

    auto allowed = [&](int loc, int t) {
        return t < tab.blocked_from[static_cast<std::size_t>(loc)] && tab.vertex.count(vkey(loc, t)) == 0;
    };
    auto can_move = [&](int from, int to, int t) {
        return allowed(to, t) && (from == to || tab.edge.count(ekey(from, to, t)) == 0);
    };

    const std::vector<int> dist = q.heuristic != nullptr ? *q.heuristic : bfs_distances(map, goal).dist;
    Mdd mdd;
    auto& levels = mdd.levels;
    levels.resize(static_cast<std::size_t>(cost) + 1);
    if (!allowed(start, 0)) return {};
    levels[0].push_back(start);
    std::array<int, 4> nbs{};
    std::vector<int> mark(static_cast<std::size_t>(map.size()), -1);
    for (int t = 1; t <= cost; ++t) {
        for (int loc : levels[static_cast<std::size_t>(t - 1)]) {
            const int n_nb = map.empty_neighbors(loc, nbs);
            for (int k = 0; k <= n_nb; ++k) {
                const int next = k < n_nb ? nbs[static_cast<std::size_t>(k)] : loc;
                if (mark[static_cast<std::size_t>(next)] == t || dist[static_cast<std::size_t>(next)] > cost - t) continue;
                if (!can_move(loc, next, t)) continue;
                mark[static_cast<std::size_t>(next)] = t;
                levels[static_cast<std::size_t>(t)].push_back(next);
            }
        }
    }
    auto& last = levels[static_cast<std::size_t>(cost)];
    if (std::find(last.begin(), last.end(), goal) == last.end()) return {};
    last.assign(1, goal);

    // Backward pass: keep tiles with a move into the next (already pruned) level.
    std::vector<int> slot(static_cast<std::size_t>(map.size()), -1);
    mdd.children.resize(static_cast<std::size_t>(cost));
    for (int t = cost - 1; t >= 0; --t) {
        const auto& after = levels[static_cast<std::size_t>(t + 1)];
        for (std::size_t i = 0; i < after.size(); ++i) slot[static_cast<std::size_t>(after[i])] = static_cast<int>(i);
        auto& here = levels[static_cast<std::size_t>(t)];
        std::sort(here.begin(), here.end());
        std::vector<int> kept;
        std::vector<std::vector<int>> kids;
        for (int loc : here) {
            std::vector<int> out;
            const int n_nb = map.empty_neighbors(loc, nbs);
            for (int k = 0; k <= n_nb; ++k) {
                const int next = k < n_nb ? nbs[static_cast<std::size_t>(k)] : loc;
                const int j = slot[static_cast<std::size_t>(next)];
                if (j >= 0 && can_move(loc, next, t + 1)) out.push_back(j);
            }
            if (out.empty()) continue;
            std::sort(out.begin(), out.end());
            kept.push_back(loc);
            kids.push_back(std::move(out));
        }
        for (int loc : after) slot[static_cast<std::size_t>(loc)] = -1;
        here = std::move(kept);
        mdd.children[static_cast<std::size_t>(t)] = std::move(kids);
    }
    return mdd;
}

Compatibility mdd_compatible(const Mdd& a, const Mdd& b, long& budget) {
    if (a.empty() || b.empty()) return Compatibility::No;
    const int horizon = std::max(a.cost(), b.cost());
    // Past its last level a diagram has a single node: the goal.
    auto width = [](const Mdd& m, int t) { return t < m.cost() ? m.levels[static_cast<std::size_t>(t)].size() : std::size_t{1}; };
    auto tile = [](const Mdd& m, int t, int i) {
        return t < m.cost() ? m.levels[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] : m.levels.back().front();
    };
    static const std::vector<int> stay{0};
    auto kids = [](const Mdd& m, int t, int i) -> const std::vector<int>& {
        return t < m.cost() ? m.children[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] : stay;
    };

    if (tile(a, 0, 0) == tile(b, 0, 0)) return Compatibility::No;
    std::vector<std::pair<int, int>> frontier{{0, 0}};
    std::vector<char> seen;
    for (int t = 0; t < horizon; ++t) {
        const std::size_t wb = width(b, t + 1);
        seen.assign(width(a, t + 1) * wb, 0);
        std::vector<std::pair<int, int>> next;
        for (const auto& [i, j] : frontier) {
            const int la = tile(a, t, i), lb = tile(b, t, j);
            for (int ni : kids(a, t, i)) {
                const int na = tile(a, t + 1, ni);
                for (int nj : kids(b, t, j)) {
                    const int nb = tile(b, t + 1, nj);
                    if (na == nb || (na == lb && nb == la)) continue;
                    char& s = seen[static_cast<std::size_t>(ni) * wb + static_cast<std::size_t>(nj)];
                    if (s) continue;
                    s = 1;
                    if (--budget < 0) return Compatibility::Unknown;
                    next.emplace_back(ni, nj);
                }
            }
        }
        if (next.empty()) return Compatibility::No;
        frontier = std::move(next);
    }
    return Compatibility::Yes;
}

namespace {

struct JointKey {
    std::array<int, 4> loc;
    int mask;
    int t;
    friend bool operator==(const JointKey&, const JointKey&) = default;
};

struct JointKeyHash {
    std::size_t operator()(const JointKey& k) const {
        std::uint64_t h = static_cast<std::uint64_t>(k.mask) * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(k.t);
        for (int v : k.loc) h = (h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(v))) * 0x100000001B3ULL;
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

}  // namespace

JointPlan joint_search(const MapfInstance& instance, const std::vector<LowLevelQuery>& queries, long max_expansions,
                       const Deadline* deadline) {
    const GridMap& map = instance.map();
    const int k = static_cast<int>(queries.size());
    if (k < 1 || k > 4) throw MapError("joint search supports 1 to 4 agents");
    std::vector<Tables> tab;
    std::vector<std::vector<int>> dist;
    std::vector<int> start, goal;
    int static_time = 0;
    for (const LowLevelQuery& src : queries) {
        LowLevelQuery own;
        own.agent = src.agent;
        own.constraints = src.constraints;
        tab.push_back(build_tables(instance, own));
        goal.push_back(instance.goal_index(src.agent));
        start.push_back(instance.start_index(src.agent));
        dist.push_back(src.heuristic != nullptr ? *src.heuristic : bfs_distances(map, goal.back()).dist);
        if (dist.back()[static_cast<std::size_t>(start.back())] == kUnreachable) return {};
        if (tab.back().blocked_from[static_cast<std::size_t>(goal.back())] != kNever) return {};
        static_time = std::max(static_time, tab.back().static_time);
    }
    const int all_done = (1 << k) - 1;

    auto allowed = [&](int i, int loc, int t) {
        const Tables& tb = tab[static_cast<std::size_t>(i)];
        return t < tb.blocked_from[static_cast<std::size_t>(loc)] && tb.vertex.count(vkey(loc, t)) == 0;
    };
    auto can_move = [&](int i, int from, int to, int t) {
        return allowed(i, to, t) && (from == to || tab[static_cast<std::size_t>(i)].edge.count(ekey(from, to, t)) == 0);
    };

    struct State {
        std::array<int, 4> loc;
        int mask;  // bit i: agent i rests at its goal for good
        int t;
        long g;
        int parent;
    };
    auto key_of = [&](const State& s) { return JointKey{s.loc, s.mask, std::min(s.t, static_time)}; };
    auto h_state = [&](const State& s) {
        long h = 0;
        for (int i = 0; i < k; ++i) {
            if (s.mask >> i & 1) continue;
            const auto ui = static_cast<std::size_t>(i);
            h += std::max(dist[ui][static_cast<std::size_t>(s.loc[ui])], tab[ui].goal_free_after - s.t);
        }
        return h;
    };

    std::vector<State> states;
    std::unordered_map<JointKey, long, JointKeyHash> best_g;
    using Entry = std::tuple<long, long, int>;  // f, -g, state id
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    auto push = [&](const State& s) {
        auto [it, inserted] = best_g.try_emplace(key_of(s), s.g);
        if (!inserted) {
            if (it->second <= s.g) return;
            it->second = s.g;
        }
        states.push_back(s);
        frontier.emplace(s.g + h_state(s), -s.g, static_cast<int>(states.size()) - 1);
    };

    State init{{-1, -1, -1, -1}, 0, 0, 0, -1};
    for (int i = 0; i < k; ++i) {
        if (!allowed(i, start[static_cast<std::size_t>(i)], 0)) return {};
        for (int j = 0; j < i; ++j) {
            if (start[static_cast<std::size_t>(i)] == start[static_cast<std::size_t>(j)]) return {};
        }
        init.loc[static_cast<std::size_t>(i)] = start[static_cast<std::size_t>(i)];
    }
    push(init);

    std::array<int, 4> nbs{};
    std::array<std::vector<int>, 4> options;
    long expansions = 0;
    while (!frontier.empty()) {
        const int id = std::get<2>(frontier.top());
        frontier.pop();
        const State s = states[static_cast<std::size_t>(id)];
        if (best_g[key_of(s)] < s.g) continue;
        if (s.mask == all_done) {
            JointPlan plan;
            plan.found = true;
            plan.cost = s.g;
            plan.paths.resize(static_cast<std::size_t>(k));
            std::vector<int> chain;
            for (int c = id; c >= 0; c = states[static_cast<std::size_t>(c)].parent) chain.push_back(c);
            std::reverse(chain.begin(), chain.end());
            for (int i = 0; i < k; ++i) {
                auto& p = plan.paths[static_cast<std::size_t>(i)];
                for (int c : chain) {
                    const State& st = states[static_cast<std::size_t>(c)];
                    if (static_cast<int>(p.size()) == st.t + 1) continue;  // a resting step at the same time
                    if (st.mask >> i & 1) break;
                    p.push_back(st.loc[static_cast<std::size_t>(i)]);
                }
                // The agent rests from the last recorded step on.
                while (p.size() > 1 && p[p.size() - 1] == p[p.size() - 2] &&
                       static_cast<int>(p.size()) - 1 > tab[static_cast<std::size_t>(i)].goal_free_after) {
                    p.pop_back();
                }
            }
            return plan;
        }
        if (++expansions > max_expansions || (deadline != nullptr && (expansions & 255) == 0 && deadline->expired())) {
            JointPlan plan;
            plan.gave_up = true;
            return plan;
        }

        for (int i = 0; i < k; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (!(s.mask >> i & 1) && s.loc[ui] == goal[ui] && s.t >= tab[ui].goal_free_after) {
                State done = s;
                done.mask |= 1 << i;
                done.parent = id;
                push(done);
            }
        }
        const int t = s.t + 1;
        long step = 0;
        bool stuck = false;
        for (int i = 0; i < k && !stuck; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            auto& opt = options[ui];
            opt.clear();
            if (s.mask >> i & 1) {
                opt.push_back(s.loc[ui]);
                continue;
            }
            ++step;
            const int cnt = map.empty_neighbors(s.loc[ui], nbs);
            for (int j = 0; j <= cnt; ++j) {
                const int next = j < cnt ? nbs[static_cast<std::size_t>(j)] : s.loc[ui];
                if (can_move(i, s.loc[ui], next, t)) opt.push_back(next);
            }
            stuck = opt.empty();
        }
        if (stuck) continue;
        State nxt{s.loc, s.mask, t, s.g + step, id};
        auto assign = [&](auto&& self, int i) -> void {
            if (i == k) {
                push(nxt);
                return;
            }
            const auto ui = static_cast<std::size_t>(i);
            for (int loc : options[ui]) {
                bool clash = false;
                for (int j = 0; j < i && !clash; ++j) {
                    const auto uj = static_cast<std::size_t>(j);
                    clash = nxt.loc[uj] == loc || (nxt.loc[uj] == s.loc[ui] && loc == s.loc[uj]);
                }
                if (clash) continue;
                nxt.loc[ui] = loc;
                self(self, i + 1);
            }
        };
        assign(assign, 0);
    }
    return {};
}

}  // namespace mapgen
