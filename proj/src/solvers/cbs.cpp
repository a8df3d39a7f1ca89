#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <memory>
#include <set>

#include "conflicts.hpp"
#include "mapgen/solvers.hpp"

namespace mapgen {

namespace {

using detail::PairConflict;

constexpr long kPairStates = 50000;
constexpr int kMaxPairDelta = 12;
constexpr long kPairBudget = 4000;
constexpr long kMergeProbeBudget = 2000000;
constexpr int kMergeAfter = 16;
constexpr int kMergeMaxTiles = 64;  // joint replanning is only cheap on small maps
constexpr int kMaxGroup = 3;
constexpr long kFar = 1L << 40;

struct HighLevelNode {
    int parent = -1;
    std::optional<Constraint> constraint;
    std::vector<std::shared_ptr<const IndexPath>> paths;
    std::vector<int> lower_bounds;
    std::vector<PairConflict> conflicts;  // earliest conflict of each conflicting pair, sorted
    std::vector<std::shared_ptr<const Mdd>> mdds;  // at the current path cost; lazily built, shared with children
    std::map<std::pair<int, int>, long> pair_costs;   // lower bound on the joint cost of a pair, -1 if unsolvable
    long cost = 0;
    long lb_sum = 0;
    long h = 0;
    int d_hat = 0;
    double f_hat = 0.0;

    long lower_bound() const { return lb_sum + h; }
};

struct ConflictEvent {
    int timestep = 0;
    int agent_a = 0;
    int agent_b = 0;
    bool edge = false;

    friend bool operator<(const ConflictEvent& x, const ConflictEvent& y) {
        if (x.timestep != y.timestep) return x.timestep < y.timestep;
        if (x.agent_a != y.agent_a) return x.agent_a < y.agent_a;
        return x.agent_b < y.agent_b;
    }
};

long sum_cost(const std::vector<std::shared_ptr<const IndexPath>>& paths) {
    long c = 0;
    for (const auto& p : paths) c += static_cast<long>(p->size()) - 1;
    return c;
}

std::vector<PairConflict> all_conflicts(const std::vector<std::shared_ptr<const IndexPath>>& paths) {
    std::vector<PairConflict> out;
    const int n = static_cast<int>(paths.size());
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (auto c = detail::first_conflict(*paths[static_cast<std::size_t>(a)], *paths[static_cast<std::size_t>(b)], a, b)) {
                out.push_back(*c);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<PairConflict> update_conflicts(const std::vector<PairConflict>& parent,
                                           const std::vector<std::shared_ptr<const IndexPath>>& paths,
                                           int replanned) {
    std::vector<PairConflict> out;
    for (const PairConflict& c : parent) {
        if (c.agent_a != replanned && c.agent_b != replanned) out.push_back(c);
    }
    const int n = static_cast<int>(paths.size());
    for (int other = 0; other < n; ++other) {
        if (other == replanned) continue;
        if (auto c = detail::first_conflict(*paths[static_cast<std::size_t>(replanned)], *paths[static_cast<std::size_t>(other)],
                                            replanned, other)) {
            out.push_back(*c);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct WeightedEdge {
    int a;
    int b;
    long weight;
};

// Smallest sum of nonnegative vertex values x with x_a + x_b >= weight on every edge. Exact on
// small components; larger ones fall back to a greedy matching, which is still a lower bound.
long edge_weighted_cover(const std::vector<WeightedEdge>& edges) {
    if (edges.empty()) return 0;
    std::map<int, int> id;
    for (const auto& e : edges) {
        id.emplace(e.a, 0);
        id.emplace(e.b, 0);
    }
    int next = 0;
    for (auto& [agent, v] : id) v = next++;
    const int n = next;
    std::vector<std::vector<std::pair<int, long>>> adj(static_cast<std::size_t>(n));
    for (const auto& e : edges) {
        adj[static_cast<std::size_t>(id[e.a])].emplace_back(id[e.b], e.weight);
        adj[static_cast<std::size_t>(id[e.b])].emplace_back(id[e.a], e.weight);
    }
    std::vector<int> component(static_cast<std::size_t>(n), -1);
    long total = 0;
    for (int root = 0; root < n; ++root) {
        if (component[static_cast<std::size_t>(root)] >= 0) continue;
        std::vector<int> members{root};
        component[static_cast<std::size_t>(root)] = root;
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (const auto& [u, w] : adj[static_cast<std::size_t>(members[i])]) {
                if (component[static_cast<std::size_t>(u)] < 0) {
                    component[static_cast<std::size_t>(u)] = root;
                    members.push_back(u);
                }
            }
        }
        if (members.size() > 8) {
            std::vector<WeightedEdge> local;
            for (const auto& e : edges) {
                if (component[static_cast<std::size_t>(id[e.a])] == root) local.push_back(e);
            }
            std::stable_sort(local.begin(), local.end(), [](const auto& x, const auto& y) { return x.weight > y.weight; });
            std::set<int> used;
            for (const auto& e : local) {
                if (used.count(e.a) || used.count(e.b)) continue;
                used.insert(e.a);
                used.insert(e.b);
                total += e.weight;
            }
            continue;
        }
        std::vector<long> value(static_cast<std::size_t>(n), -1);
        long best = 0;
        for (const auto& e : edges) {
            if (component[static_cast<std::size_t>(id[e.a])] == root) best += e.weight;
        }
        auto search = [&](auto&& self, std::size_t k, long sum) -> void {
            if (sum >= best) return;
            if (k == members.size()) {
                best = sum;
                return;
            }
            const int v = members[k];
            long lo = 0, hi = 0;
            for (const auto& [u, w] : adj[static_cast<std::size_t>(v)]) {
                hi = std::max(hi, w);
                if (value[static_cast<std::size_t>(u)] >= 0) lo = std::max(lo, w - value[static_cast<std::size_t>(u)]);
            }
            for (long x = lo; x <= hi; ++x) {
                value[static_cast<std::size_t>(v)] = x;
                self(self, k + 1, sum + x);
            }
            value[static_cast<std::size_t>(v)] = -1;
        };
        search(search, 0, 0);
        total += best;
    }
    return total;
}

class CbsSearch {
public:
    CbsSearch(const MapfInstance& instance, double w, double time_limit)
        : instance_(instance), map_(instance.map()), w_(w), time_limit_(time_limit), deadline_(time_limit),
          n_(instance.num_agents()) {
        for (int i = 0; i < n_; ++i) {
            heuristics_.push_back(bfs_distances(map_, instance.goal_index(i)).dist);
            groups_.push_back({i});
            group_of_.push_back(i);
        }
        degree_.assign(static_cast<std::size_t>(map_.size()), 0);
        std::array<int, 4> nbs{};
        for (int v = 0; v < map_.size(); ++v) {
            if (map_.is_empty(v)) degree_[static_cast<std::size_t>(v)] = map_.empty_neighbors(v, nbs);
        }
    }

    Solution run();

private:
    struct Outcome {
        std::optional<Solution> solution;  // empty: groups were merged, search again
    };

    HighLevelNode& node(int idx) { return nodes_[static_cast<std::size_t>(idx)]; }
    const IndexPath& path(int idx, int agent) { return *node(idx).paths[static_cast<std::size_t>(agent)]; }
    bool grouped(int agent) const { return groups_[static_cast<std::size_t>(group_of_[static_cast<std::size_t>(agent)])].size() > 1; }

    std::vector<Constraint> constraints_for(int idx, int agent) {
        std::vector<Constraint> out;
        for (int k = idx; k >= 0; k = node(k).parent) {
            const auto& kc = node(k).constraint;
            if (kc && kc->agent == agent) out.push_back(*kc);
        }
        return out;
    }

    LowLevelQuery query_for(int idx, int agent) {
        LowLevelQuery q;
        q.agent = agent;
        q.focal_w = w_;
        q.heuristic = &heuristics_[static_cast<std::size_t>(agent)];
        if (idx >= 0) q.constraints = constraints_for(idx, agent);
        return q;
    }

    const Mdd& mdd(int idx, int agent);
    long pair_bound(int idx, int a, int b);
    bool cardinal_for(int idx, int agent, const ConflictEvent& e);
    std::vector<int> distances_without_edge(int source, int u, int v) const;
    std::optional<std::array<Constraint, 2>> corridor(int idx, const ConflictEvent& e);
    std::array<Constraint, 2> choose_branching(int idx);
    bool update_heuristic(int idx);
    bool try_merge(int a, int b);
    Outcome search();

    Solution finish(int idx);
    Solution timed_out() const {
        Solution sol;
        sol.status = SolveStatus::Timeout;
        sol.cpu_runtime = time_limit_;
        return sol;
    }

    const MapfInstance& instance_;
    const GridMap& map_;
    double w_;
    double time_limit_;
    Deadline deadline_;
    int n_;
    std::vector<std::vector<int>> heuristics_;
    std::vector<int> degree_;
    std::vector<HighLevelNode> nodes_;
    // Agents planned jointly; groups_[g] is sorted and group_of_ maps an agent to its group.
    std::vector<std::vector<int>> groups_;
    std::vector<int> group_of_;
    std::map<std::pair<int, int>, int> group_conflicts_;
    std::set<std::pair<int, int>> unmergeable_;
};

const Mdd& CbsSearch::mdd(int idx, int agent) {
    auto& slot = node(idx).mdds[static_cast<std::size_t>(agent)];
    if (!slot) {
        const int cost = static_cast<int>(path(idx, agent).size()) - 1;
        slot = std::make_shared<const Mdd>(build_mdd(instance_, query_for(idx, agent), cost));
    }
    return *slot;
}

// Cardinal for an agent: every path of its current cost runs into the conflict, so either
// resolution raises that agent's cost. Resting at the goal counts as cardinal.
bool CbsSearch::cardinal_for(int idx, int agent, const ConflictEvent& e) {
    const IndexPath& p = path(idx, agent);
    if (e.timestep >= static_cast<int>(p.size()) - 1) return !e.edge;
    if (grouped(agent)) return false;
    const auto& levels = mdd(idx, agent).levels;
    auto single = [&](int t, int loc) {
        return t < static_cast<int>(levels.size()) && levels[static_cast<std::size_t>(t)].size() == 1 &&
               levels[static_cast<std::size_t>(t)][0] == loc;
    };
    if (!single(e.timestep, detail::at_time(p, e.timestep))) return false;
    return !e.edge || single(e.timestep - 1, detail::at_time(p, e.timestep - 1));
}

std::vector<int> CbsSearch::distances_without_edge(int source, int u, int v) const {
    std::vector<int> dist(static_cast<std::size_t>(map_.size()), kUnreachable);
    std::vector<int> queue{source};
    dist[static_cast<std::size_t>(source)] = 0;
    std::array<int, 4> nbs{};
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int x = queue[head];
        const int k = map_.empty_neighbors(x, nbs);
        for (int i = 0; i < k; ++i) {
            const int y = nbs[static_cast<std::size_t>(i)];
            if ((x == u && y == v) || (x == v && y == u)) continue;
            if (dist[static_cast<std::size_t>(y)] != kUnreachable) continue;
            dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
            queue.push_back(y);
        }
    }
    return dist;
}

// Chain e1 = c0, c1 .. c(L-1), cL = e2 whose inner tiles have degree 2. Two agents on it cannot
// change order, so if a (behind) must reach e2 and b must reach e1 through the chain, whoever
// arrives second does so at least L + 1 steps after the other's arrival. Either a stays off e2
// until b could have got to e1 plus L steps, or the reverse. Arrivals around the chain (over a
// different last edge) cap both ranges.
std::optional<std::array<Constraint, 2>> CbsSearch::corridor(int idx, const ConflictEvent& e) {
    const IndexPath& pa = path(idx, e.agent_a);
    const IndexPath& pb = path(idx, e.agent_b);
    int v = detail::at_time(pa, e.timestep);
    if (degree_[static_cast<std::size_t>(v)] != 2 && e.edge) v = detail::at_time(pa, e.timestep - 1);
    if (degree_[static_cast<std::size_t>(v)] != 2) return std::nullopt;

    std::vector<int> position(static_cast<std::size_t>(map_.size()), -1);
    std::array<std::vector<int>, 2> arms;
    std::array<int, 4> nbs{};
    map_.empty_neighbors(v, nbs);
    const std::array<int, 2> first{nbs[0], nbs[1]};
    std::vector<char> inner(static_cast<std::size_t>(map_.size()), 0);
    inner[static_cast<std::size_t>(v)] = 1;
    for (int side = 0; side < 2; ++side) {
        int prev = v, cur = first[static_cast<std::size_t>(side)];
        while (degree_[static_cast<std::size_t>(cur)] == 2) {
            if (inner[static_cast<std::size_t>(cur)]) return std::nullopt;  // a ring
            inner[static_cast<std::size_t>(cur)] = 1;
            arms[static_cast<std::size_t>(side)].push_back(cur);
            map_.empty_neighbors(cur, nbs);
            const int next = nbs[0] == prev ? nbs[1] : nbs[0];
            prev = cur;
            cur = next;
        }
        arms[static_cast<std::size_t>(side)].push_back(cur);
    }
    std::vector<int> chain(arms[0].rbegin(), arms[0].rend());
    chain.push_back(v);
    chain.insert(chain.end(), arms[1].begin(), arms[1].end());
    if (chain.front() == chain.back()) return std::nullopt;
    const int length = static_cast<int>(chain.size()) - 1;
    for (int i = 0; i <= length; ++i) position[static_cast<std::size_t>(chain[static_cast<std::size_t>(i)])] = i;

    const int sa = instance_.start_index(e.agent_a), sb = instance_.start_index(e.agent_b);
    for (int orient = 0; orient < 2; ++orient) {
        // Position along the direction a travels; off-chain starts sit behind the heading agent.
        auto pos = [&](int tile) {
            const int p = position[static_cast<std::size_t>(tile)];
            return orient == 0 ? p : (p < 0 ? -1 : length - p);
        };
        const int ea = orient == 0 ? chain.back() : chain.front();  // a heads here
        const int eb = orient == 0 ? chain.front() : chain.back();
        const int before_ea = orient == 0 ? chain[static_cast<std::size_t>(length - 1)] : chain[1];
        const int before_eb = orient == 0 ? chain[1] : chain[static_cast<std::size_t>(length - 1)];
        const int qa = pos(sa);
        const int qb_raw = pos(sb);
        const int qb = qb_raw < 0 ? length + 1 : qb_raw;
        if (qa >= length || qb <= 0 || qa >= qb) continue;

        const long ta = bfs_distances(map_, ea).dist[static_cast<std::size_t>(sa)];
        const long tb = bfs_distances(map_, eb).dist[static_cast<std::size_t>(sb)];
        const auto around_a = distances_without_edge(ea, ea, before_ea);
        const auto around_b = distances_without_edge(eb, eb, before_eb);
        const long bypass_a = around_a[static_cast<std::size_t>(sa)] == kUnreachable ? kFar : around_a[static_cast<std::size_t>(sa)];
        const long bypass_b = around_b[static_cast<std::size_t>(sb)] == kUnreachable ? kFar : around_b[static_cast<std::size_t>(sb)];
        const long until_a = std::min(tb + length, bypass_a - 1);
        const long until_b = std::min(ta + length, bypass_b - 1);
        if (until_a < 0 || until_b < 0) continue;

        auto visits_by = [](const IndexPath& p, int loc, long until) {
            for (int t = 0; t <= until && t < static_cast<int>(p.size()); ++t) {
                if (p[static_cast<std::size_t>(t)] == loc) return true;
            }
            return p.back() == loc && static_cast<long>(p.size()) - 1 <= until;
        };
        if (!visits_by(pa, ea, until_a) || !visits_by(pb, eb, until_b)) continue;

        Constraint ca, cb;
        ca.kind = cb.kind = Constraint::Kind::Range;
        ca.agent = e.agent_a;
        ca.location = ea;
        ca.until = static_cast<int>(until_a);
        cb.agent = e.agent_b;
        cb.location = eb;
        cb.until = static_cast<int>(until_b);
        return std::array<Constraint, 2>{ca, cb};
    }
    return std::nullopt;
}

std::array<Constraint, 2> CbsSearch::choose_branching(int idx) {
    // Every conflict of every conflicting pair: cardinal ones first, then the earliest.
    std::optional<ConflictEvent> best;
    int best_rank = 3;
    std::vector<std::pair<int, int>> pairs;
    for (const PairConflict& pc : node(idx).conflicts) pairs.emplace_back(pc.agent_a, pc.agent_b);
    for (const auto& [a, b] : pairs) {
        const IndexPath& pa = path(idx, a);
        const IndexPath& pb = path(idx, b);
        const int horizon = static_cast<int>(std::max(pa.size(), pb.size()));
        for (int t = 0; t < horizon; ++t) {
            ConflictEvent e{t, a, b, false};
            const int la = detail::at_time(pa, t), lb = detail::at_time(pb, t);
            if (la == lb) {
                e.edge = false;
            } else if (t > 0 && la == detail::at_time(pb, t - 1) && lb == detail::at_time(pa, t - 1)) {
                e.edge = true;
            } else {
                continue;
            }
            if (best && best_rank == 0 && !(e < *best)) continue;
            const int rank = 2 - static_cast<int>(cardinal_for(idx, a, e)) - static_cast<int>(cardinal_for(idx, b, e));
            if (!best || rank < best_rank || (rank == best_rank && e < *best)) {
                best = e;
                best_rank = rank;
            }
        }
    }
    const ConflictEvent e = *best;
    const IndexPath& pa = path(idx, e.agent_a);
    const IndexPath& pb = path(idx, e.agent_b);

    if (!e.edge) {
        // One agent resting at its goal while the other passes: either the resting agent
        // finishes later, or the goal stays closed to the other one from then on.
        for (int side = 0; side < 2; ++side) {
            const IndexPath& p = side == 0 ? pa : pb;
            if (e.timestep < static_cast<int>(p.size()) - 1) continue;
            Constraint longer, closed;
            longer.kind = Constraint::Kind::Length;
            longer.agent = side == 0 ? e.agent_a : e.agent_b;
            longer.timestep = e.timestep + 1;
            closed.kind = Constraint::Kind::Range;
            closed.agent = side == 0 ? e.agent_b : e.agent_a;
            closed.location = p.back();
            closed.timestep = e.timestep;
            closed.until = Constraint::kForever;
            return {longer, closed};
        }
    }
    if (auto c = corridor(idx, e)) return *c;

    std::array<Constraint, 2> out;
    for (int side = 0; side < 2; ++side) {
        const IndexPath& own = side == 0 ? pa : pb;
        Constraint& c = out[static_cast<std::size_t>(side)];
        c.agent = side == 0 ? e.agent_a : e.agent_b;
        c.timestep = e.timestep;
        if (e.edge) {
            c.kind = Constraint::Kind::Edge;
            c.location = detail::at_time(own, e.timestep - 1);
            c.to_location = detail::at_time(own, e.timestep);
        } else {
            c.kind = Constraint::Kind::Vertex;
            c.location = detail::at_time(own, e.timestep);
        }
    }
    return out;
}

// Lower bound on the joint cost of a pair given their own constraints, or -1 if they cannot
// both reach their goals. Splits of k extra steps over the two diagrams are tried for
// k = 0, 1, ..; the first compatible split gives the joint optimum, and running out of budget
// still proves every smaller k impossible.
long CbsSearch::pair_bound(int idx, int a, int b) {
    const long base_a = node(idx).lower_bounds[static_cast<std::size_t>(a)];
    const long base_b = node(idx).lower_bounds[static_cast<std::size_t>(b)];
    std::map<std::pair<int, long>, std::shared_ptr<const Mdd>> diagrams;
    auto diagram = [&](int agent, long cost) -> const Mdd& {
        if (cost == static_cast<long>(path(idx, agent).size()) - 1) return mdd(idx, agent);
        auto& slot = diagrams[{agent, cost}];
        if (!slot) slot = std::make_shared<const Mdd>(build_mdd(instance_, query_for(idx, agent), static_cast<int>(cost)));
        return *slot;
    };
    long budget = kPairStates;
    for (int k = 0; k <= kMaxPairDelta; ++k) {
        for (int i = 0; i <= k; ++i) {
            const Mdd& da = diagram(a, base_a + i);
            if (da.empty()) continue;
            const Mdd& db = diagram(b, base_b + k - i);
            switch (mdd_compatible(da, db, budget)) {
                case Compatibility::Yes:
                case Compatibility::Unknown: return base_a + base_b + k;
                case Compatibility::No: break;
            }
        }
    }
    const JointPlan plan = joint_search(instance_, {query_for(idx, a), query_for(idx, b)}, kPairBudget);
    if (plan.found) return plan.cost;
    return plan.gave_up ? base_a + base_b + kMaxPairDelta + 1 : -1;
}

// Pairwise dependency heuristic over conflicting pairs of ungrouped agents: the extra cost each
// pair needs on top of its two lower bounds, combined by an edge-weighted vertex cover. Returns
// false when some pair cannot be solved at all, i.e. the node is a dead end.
bool CbsSearch::update_heuristic(int idx) {
    std::vector<WeightedEdge> edges;
    for (const PairConflict& pc : node(idx).conflicts) {
        if (grouped(pc.agent_a) || grouped(pc.agent_b)) continue;
        const auto key = std::make_pair(pc.agent_a, pc.agent_b);
        auto it = node(idx).pair_costs.find(key);
        if (it == node(idx).pair_costs.end()) it = node(idx).pair_costs.emplace(key, pair_bound(idx, pc.agent_a, pc.agent_b)).first;
        if (it->second < 0) return false;
        const long gap = it->second - node(idx).lower_bounds[static_cast<std::size_t>(pc.agent_a)] -
                         node(idx).lower_bounds[static_cast<std::size_t>(pc.agent_b)];
        if (gap > 0) edges.push_back({pc.agent_a, pc.agent_b, gap});
    }
    node(idx).h = edge_weighted_cover(edges);
    return true;
}

// Groups that keep running into each other are planned jointly from then on (the search
// restarts). Only small groups on small maps whose unconstrained joint plan is within budget
// are merged.
bool CbsSearch::try_merge(int a, int b) {
    const int ga = group_of_[static_cast<std::size_t>(a)], gb = group_of_[static_cast<std::size_t>(b)];
    const auto key = std::minmax(ga, gb);
    if (map_.count_empty() > kMergeMaxTiles || unmergeable_.count(key)) return false;
    if (++group_conflicts_[key] < kMergeAfter) return false;
    std::vector<int> merged = groups_[static_cast<std::size_t>(ga)];
    merged.insert(merged.end(), groups_[static_cast<std::size_t>(gb)].begin(), groups_[static_cast<std::size_t>(gb)].end());
    std::sort(merged.begin(), merged.end());
    if (static_cast<int>(merged.size()) > kMaxGroup) {
        unmergeable_.insert(key);
        return false;
    }
    std::vector<LowLevelQuery> qs;
    for (int agent : merged) qs.push_back(query_for(-1, agent));
    const JointPlan probe = joint_search(instance_, qs, kMergeProbeBudget, &deadline_);
    if (probe.gave_up) {
        unmergeable_.insert(key);
        return false;
    }
    const int keep = std::min(ga, gb), drop = std::max(ga, gb);
    groups_[static_cast<std::size_t>(keep)] = merged;
    groups_[static_cast<std::size_t>(drop)].clear();
    for (int agent : merged) group_of_[static_cast<std::size_t>(agent)] = keep;
    return true;
}

Solution CbsSearch::finish(int idx) {
    Solution sol;
    sol.status = SolveStatus::Solved;
    for (const auto& p : node(idx).paths) {
        IndexPath trimmed = *p;
        while (trimmed.size() > 1 && trimmed[trimmed.size() - 1] == trimmed[trimmed.size() - 2]) trimmed.pop_back();
        sol.paths.push_back(to_cells(map_, trimmed));
        sol.sum_of_cost += static_cast<long>(trimmed.size()) - 1;
        sol.makespan = std::max(sol.makespan, static_cast<int>(trimmed.size()) - 1);
    }
    sol.cpu_runtime = deadline_.elapsed();
    return sol;
}

Solution CbsSearch::run() {
    for (;;) {
        Outcome out = search();
        if (out.solution) return *out.solution;
    }
}

CbsSearch::Outcome CbsSearch::search() {
    nodes_.clear();
    auto give_up = [this] { return Outcome{timed_out()}; };

    // Plans one group under the constraints of node `idx` (-1: none) plus `extra`. Returns
    // false if the group has no plan; sets `expired` when the deadline cut planning short.
    bool expired = false;
    auto plan_group = [&](HighLevelNode& target, int idx, int group, const Constraint* extra,
                          const std::vector<const IndexPath*>& soft) {
        const auto& members = groups_[static_cast<std::size_t>(group)];
        std::vector<LowLevelQuery> qs;
        for (int agent : members) {
            qs.push_back(query_for(idx, agent));
            if (extra != nullptr && extra->agent == agent) qs.back().constraints.push_back(*extra);
        }
        if (members.size() == 1) {
            LowLevelQuery& q = qs.front();
            q.soft_paths = soft;
            auto res = low_level_search(instance_, q, &deadline_);
            if (!res) {
                expired = deadline_.expired();
                return false;
            }
            target.paths[static_cast<std::size_t>(members[0])] = std::make_shared<const IndexPath>(std::move(res->path));
            target.lower_bounds[static_cast<std::size_t>(members[0])] =
                idx >= 0 ? std::max(res->lower_bound, node(idx).lower_bounds[static_cast<std::size_t>(members[0])])
                         : res->lower_bound;
            target.mdds[static_cast<std::size_t>(members[0])].reset();
            return true;
        }
        JointPlan plan = joint_search(instance_, qs, std::numeric_limits<long>::max(), &deadline_);
        if (!plan.found) {
            expired = plan.gave_up;
            return false;
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            const auto agent = static_cast<std::size_t>(members[i]);
            target.lower_bounds[agent] = static_cast<int>(plan.paths[i].size()) - 1;
            target.paths[agent] = std::make_shared<const IndexPath>(std::move(plan.paths[i]));
            target.mdds[agent].reset();
        }
        return true;
    };

    {
        HighLevelNode root;
        root.paths.resize(static_cast<std::size_t>(n_));
        root.lower_bounds.resize(static_cast<std::size_t>(n_));
        root.mdds.resize(static_cast<std::size_t>(n_));
        std::vector<const IndexPath*> planned;
        for (int g = 0; g < static_cast<int>(groups_.size()); ++g) {
            if (groups_[static_cast<std::size_t>(g)].empty()) continue;
            if (!plan_group(root, -1, g, nullptr, planned)) return give_up();
            for (int agent : groups_[static_cast<std::size_t>(g)]) planned.push_back(root.paths[static_cast<std::size_t>(agent)].get());
        }
        root.cost = sum_cost(root.paths);
        for (int lb : root.lower_bounds) root.lb_sum += lb;
        root.conflicts = all_conflicts(root.paths);
        root.d_hat = static_cast<int>(root.conflicts.size());
        nodes_.push_back(std::move(root));
        if (!update_heuristic(0)) return give_up();
        node(0).f_hat = std::max(static_cast<double>(node(0).cost + node(0).d_hat), static_cast<double>(node(0).lower_bound()));
    }

    // Explicit estimation search over three orderings of the same node set. With w == 1 only
    // the lower-bound ordering is used, which is plain best-first CBS.
    auto cleanup_cmp = [this](int a, int b) {
        const auto& x = node(a);
        const auto& y = node(b);
        if (x.lower_bound() != y.lower_bound()) return x.lower_bound() < y.lower_bound();
        if (x.d_hat != y.d_hat) return x.d_hat < y.d_hat;
        return a < b;
    };
    auto open_cmp = [this](int a, int b) {
        const auto& x = node(a);
        const auto& y = node(b);
        if (x.f_hat != y.f_hat) return x.f_hat < y.f_hat;
        if (x.cost != y.cost) return x.cost < y.cost;
        return a < b;
    };
    auto focal_cmp = [this](int a, int b) {
        const auto& x = node(a);
        const auto& y = node(b);
        if (x.d_hat != y.d_hat) return x.d_hat < y.d_hat;
        if (x.f_hat != y.f_hat) return x.f_hat < y.f_hat;
        return a < b;
    };
    std::set<int, decltype(cleanup_cmp)> cleanup(cleanup_cmp);
    std::set<int, decltype(open_cmp)> open(open_cmp);
    std::set<int, decltype(focal_cmp)> focal(focal_cmp);
    double focal_added_up_to = -1.0;
    const bool optimal = w_ == 1.0;

    auto insert = [&](int idx) {
        cleanup.insert(idx);
        if (optimal) return;
        open.insert(idx);
        if (node(idx).f_hat <= focal_added_up_to + 1e-9) focal.insert(idx);
    };
    insert(0);

    while (!cleanup.empty()) {
        if (deadline_.expired()) return give_up();

        int chosen = *cleanup.begin();
        if (!optimal) {
            const double bound = w_ * node(*open.begin()).f_hat;
            if (bound > focal_added_up_to) {
                for (auto it = open.begin(); it != open.end(); ++it) {
                    const double f = node(*it).f_hat;
                    if (f > bound + 1e-9) break;
                    if (f > focal_added_up_to + 1e-9) focal.insert(*it);
                }
                focal_added_up_to = bound;
            }
            int best_d = -1;
            for (int idx : focal) {
                if (node(idx).f_hat <= bound + 1e-9) {
                    best_d = idx;
                    break;
                }
            }
            const int best_f = *open.begin();
            const double lb_limit = w_ * static_cast<double>(node(chosen).lower_bound()) + 1e-9;
            if (best_d >= 0 && static_cast<double>(node(best_d).cost) <= lb_limit) {
                chosen = best_d;
            } else if (static_cast<double>(node(best_f).cost) <= lb_limit) {
                chosen = best_f;
            }
        }
        cleanup.erase(chosen);
        open.erase(chosen);
        focal.erase(chosen);

        if (node(chosen).conflicts.empty()) return Outcome{finish(chosen)};

        const std::array<Constraint, 2> branches = choose_branching(chosen);
        if (try_merge(branches[0].agent, branches[1].agent)) return Outcome{};

        for (const Constraint& c : branches) {
            const int agent = c.agent;
            const int group = group_of_[static_cast<std::size_t>(agent)];
            std::vector<const IndexPath*> soft;
            for (int i = 0; i < n_; ++i) {
                if (group_of_[static_cast<std::size_t>(i)] != group) soft.push_back(node(chosen).paths[static_cast<std::size_t>(i)].get());
            }
            HighLevelNode child;
            child.parent = chosen;
            child.constraint = c;
            child.paths = node(chosen).paths;
            child.lower_bounds = node(chosen).lower_bounds;
            child.mdds = node(chosen).mdds;
            if (!plan_group(child, chosen, group, &c, soft)) {
                if (expired) return give_up();
                continue;
            }
            const HighLevelNode& parent = node(chosen);
            for (const auto& [key, value] : parent.pair_costs) {
                if (group_of_[static_cast<std::size_t>(key.first)] != group && group_of_[static_cast<std::size_t>(key.second)] != group) {
                    child.pair_costs.emplace(key, value);
                }
            }
            child.cost = sum_cost(child.paths);
            for (int lb : child.lower_bounds) child.lb_sum += lb;
            child.conflicts = parent.conflicts;
            for (int member : groups_[static_cast<std::size_t>(group)]) {
                child.conflicts = update_conflicts(child.conflicts, child.paths, member);
            }
            child.d_hat = static_cast<int>(child.conflicts.size());
            nodes_.push_back(std::move(child));
            const int idx = static_cast<int>(nodes_.size()) - 1;
            if (!update_heuristic(idx)) continue;
            node(idx).f_hat =
                std::max(static_cast<double>(node(idx).cost + node(idx).d_hat), static_cast<double>(node(idx).lower_bound()));
            insert(idx);
        }
    }
    return give_up();
}

}  // namespace

Solution solve_cbs(const MapfInstance& instance, double w, double time_limit) {
    if (w < 1.0) throw MapError("suboptimality factor must be >= 1");
    if (!is_valid(instance.map())) throw MapError("CBS requires a valid map");
    return CbsSearch(instance, w, time_limit).run();
}

}  // namespace mapgen
