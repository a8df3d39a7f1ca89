#include <gtest/gtest.h>

#include <random>
#include <set>
#include <tuple>

#include "mapgen/solvers.hpp"
#include "oracles.hpp"
#include "solver_oracles.hpp"

using namespace mapgen;

namespace {

using Step = std::tuple<int, int, int>;  // t, tile at t, tile at t + 1

// Position at time t of a path that rests at its last tile afterwards.
int at(const IndexPath& p, int t) { return t < static_cast<int>(p.size()) ? p[static_cast<std::size_t>(t)] : p.back(); }

bool satisfies(const IndexPath& p, const std::vector<Constraint>& cs, int horizon) {
    const int cost = static_cast<int>(p.size()) - 1;
    for (const Constraint& c : cs) {
        switch (c.kind) {
            case Constraint::Kind::Vertex:
                if (at(p, c.timestep) == c.location) return false;
                break;
            case Constraint::Kind::Edge:
                if (c.timestep >= 1 && at(p, c.timestep - 1) == c.location && at(p, c.timestep) == c.to_location) return false;
                break;
            case Constraint::Kind::Range:
                for (int t = c.timestep; t <= std::min(c.until, horizon); ++t) {
                    if (at(p, t) == c.location) return false;
                }
                break;
            case Constraint::Kind::Length:
                if (cost < c.timestep) return false;
                break;
        }
    }
    return true;
}

// Every sequence of `cost` moves or waits from the start that ends on the goal and satisfies the
// constraints, resting on the goal afterwards.
std::vector<IndexPath> enumerate_paths(const MapfInstance& inst, int agent, const std::vector<Constraint>& cs, int cost) {
    const GridMap& m = inst.map();
    const int goal = inst.goal_index(agent);
    const auto dist = bfs_distances(m, goal).dist;
    int horizon = cost + 1;
    for (const Constraint& c : cs) horizon = std::max(horizon, c.kind == Constraint::Kind::Range && c.until != Constraint::kForever ? c.until + 1 : c.timestep + 1);
    std::vector<IndexPath> out;
    IndexPath cur{inst.start_index(agent)};
    auto dfs = [&](auto&& self) -> void {
        const int t = static_cast<int>(cur.size()) - 1;
        if (t == cost) {
            if (cur.back() == goal && satisfies(cur, cs, horizon)) out.push_back(cur);
            return;
        }
        const int v = cur.back();
        for (int u : oracle::empty_tiles(m)) {
            if (u != v && !oracle::adjacent(m, u, v)) continue;
            if (dist[static_cast<std::size_t>(u)] > cost - t - 1) continue;
            cur.push_back(u);
            self(self);
            cur.pop_back();
        }
    };
    if (cost >= 0 && dist[static_cast<std::size_t>(inst.start_index(agent))] <= cost) dfs(dfs);
    return out;
}

bool paths_conflict(const IndexPath& a, const IndexPath& b) {
    const int horizon = static_cast<int>(std::max(a.size(), b.size()));
    for (int t = 0; t < horizon; ++t) {
        if (at(a, t) == at(b, t)) return true;
        if (t > 0 && at(a, t) == at(b, t - 1) && at(b, t) == at(a, t - 1)) return true;
    }
    return false;
}

Constraint random_constraint(std::mt19937_64& rng, const GridMap& m, int agent) {
    const auto tiles = oracle::empty_tiles(m);
    Constraint c;
    c.agent = agent;
    c.kind = static_cast<Constraint::Kind>(rng() % 4);
    c.location = tiles[rng() % tiles.size()];
    c.timestep = 1 + static_cast<int>(rng() % 6);
    if (c.kind == Constraint::Kind::Edge) {
        std::vector<int> nbs;
        for (int u : tiles) {
            if (oracle::adjacent(m, u, c.location)) nbs.push_back(u);
        }
        if (nbs.empty()) {
            c.kind = Constraint::Kind::Vertex;
        } else {
            c.to_location = nbs[rng() % nbs.size()];
        }
    }
    if (c.kind == Constraint::Kind::Range) c.until = rng() % 3 == 0 ? Constraint::kForever : c.timestep + static_cast<int>(rng() % 4);
    return c;
}

MapfInstance random_pair_instance(std::mt19937_64& rng) {
    for (;;) {
        const GridMap m = oracle::random_valid_map(rng, 2 + static_cast<int>(rng() % 3), 2 + static_cast<int>(rng() % 2), 0.2, 3);
        auto tiles = oracle::empty_tiles(m);
        std::shuffle(tiles.begin(), tiles.end(), rng);
        auto goals = tiles;
        std::shuffle(goals.begin(), goals.end(), rng);
        if (goals[0] == goals[1]) continue;
        return MapfInstance(m, {{m.cell(tiles[0]), m.cell(goals[0])}, {m.cell(tiles[1]), m.cell(goals[1])}});
    }
}

}  // namespace

TEST(Mdd, OpenGridLevels) {
    const MapfInstance inst(GridMap(3, 3), {{{0, 0}, {2, 2}}});
    LowLevelQuery q;
    const Mdd d = build_mdd(inst, q, 4);
    ASSERT_EQ(d.cost(), 4);
    std::vector<std::size_t> widths;
    for (const auto& l : d.levels) widths.push_back(l.size());
    EXPECT_EQ(widths, (std::vector<std::size_t>{1, 2, 3, 2, 1}));
    EXPECT_TRUE(build_mdd(inst, q, 3).empty());
    EXPECT_EQ(build_mdd(inst, q, 5).levels[1].size(), 3u);  // a wait at the start fits in one extra step
}

TEST(Mdd, MatchesPathEnumeration) {
    std::mt19937_64 rng(31);
    int nonempty = 0;
    for (int k = 0; k < 400; ++k) {
        const MapfInstance inst = random_pair_instance(rng);
        LowLevelQuery q;
        const int n_constraints = static_cast<int>(rng() % 4);
        for (int i = 0; i < n_constraints; ++i) q.constraints.push_back(random_constraint(rng, inst.map(), 0));
        const int d = bfs_distances(inst.map(), inst.start_index(0))[inst.goal_index(0)];
        for (int cost = d; cost <= d + 2; ++cost) {
            const auto paths = enumerate_paths(inst, 0, q.constraints, cost);
            const Mdd mdd = build_mdd(inst, q, cost);
            ASSERT_EQ(mdd.empty(), paths.empty()) << "instance " << k << " cost " << cost;
            if (paths.empty()) continue;
            ++nonempty;
            std::vector<std::set<int>> levels(static_cast<std::size_t>(cost) + 1);
            std::set<Step> steps;
            for (const auto& p : paths) {
                for (int t = 0; t <= cost; ++t) levels[static_cast<std::size_t>(t)].insert(p[static_cast<std::size_t>(t)]);
                for (int t = 0; t < cost; ++t) steps.emplace(t, p[static_cast<std::size_t>(t)], p[static_cast<std::size_t>(t) + 1]);
            }
            std::set<Step> mdd_steps;
            for (int t = 0; t <= cost; ++t) {
                const auto& level = mdd.levels[static_cast<std::size_t>(t)];
                EXPECT_EQ(std::set<int>(level.begin(), level.end()), levels[static_cast<std::size_t>(t)]) << k << " t=" << t;
                if (t == cost) break;
                for (std::size_t i = 0; i < level.size(); ++i) {
                    for (int j : mdd.children[static_cast<std::size_t>(t)][i]) mdd_steps.emplace(t, level[i], mdd.levels[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(j)]);
                }
            }
            EXPECT_EQ(mdd_steps, steps) << "instance " << k << " cost " << cost;
        }
    }
    EXPECT_GT(nonempty, 300);
}

TEST(Mdd, CompatibilityMatchesPairEnumeration) {
    std::mt19937_64 rng(32);
    int yes = 0, no = 0;
    for (int k = 0; k < 300; ++k) {
        const MapfInstance inst = random_pair_instance(rng);
        std::array<LowLevelQuery, 2> q;
        for (int a = 0; a < 2; ++a) {
            q[static_cast<std::size_t>(a)].agent = a;
            if (rng() % 2) q[static_cast<std::size_t>(a)].constraints.push_back(random_constraint(rng, inst.map(), a));
        }
        const int da = bfs_distances(inst.map(), inst.start_index(0))[inst.goal_index(0)];
        const int db = bfs_distances(inst.map(), inst.start_index(1))[inst.goal_index(1)];
        const int ca = da + static_cast<int>(rng() % 3), cb = db + static_cast<int>(rng() % 3);
        const auto pa = enumerate_paths(inst, 0, q[0].constraints, ca);
        const auto pb = enumerate_paths(inst, 1, q[1].constraints, cb);
        bool expected = false;
        for (const auto& x : pa) {
            for (const auto& y : pb) expected = expected || !paths_conflict(x, y);
        }
        long budget = 1L << 30;
        const Compatibility got = mdd_compatible(build_mdd(inst, q[0], ca), build_mdd(inst, q[1], cb), budget);
        EXPECT_EQ(got, expected ? Compatibility::Yes : Compatibility::No) << "instance " << k;
        (expected ? yes : no) += 1;
        long tiny = 0;
        if (!pa.empty() && !pb.empty() && da + db > 1) {
            EXPECT_NE(mdd_compatible(build_mdd(inst, q[0], ca), build_mdd(inst, q[1], cb), tiny), Compatibility::Yes);
        }
    }
    EXPECT_GT(yes, 50);
    EXPECT_GT(no, 50);
}

TEST(JointSearch, MatchesJointStateOracle) {
    std::mt19937_64 rng(33);
    for (int k = 0; k < 150; ++k) {
        const MapfInstance inst = oracle::random_small_instance(rng);
        std::vector<LowLevelQuery> qs(static_cast<std::size_t>(inst.num_agents()));
        for (int a = 0; a < inst.num_agents(); ++a) qs[static_cast<std::size_t>(a)].agent = a;
        const JointPlan plan = joint_search(inst, qs, 1L << 40);
        ASSERT_TRUE(plan.found) << k;
        EXPECT_EQ(plan.cost, *joint_state_oracle(inst)) << k;
        long soc = 0;
        std::vector<Path> paths;
        for (const auto& p : plan.paths) {
            soc += static_cast<long>(p.size()) - 1;
            paths.push_back(to_cells(inst.map(), p));
        }
        EXPECT_EQ(soc, plan.cost);
        Solution s;
        s.paths = paths;
        s.status = SolveStatus::Solved;
        EXPECT_TRUE(validate_solution(inst, s).empty()) << k;
    }
}

TEST(JointSearch, BudgetAndInfeasibility) {
    const MapfInstance swap(GridMap(4, 1), {{{0, 0}, {0, 3}}, {{0, 3}, {0, 0}}});
    std::vector<LowLevelQuery> qs(2);
    qs[1].agent = 1;
    const JointPlan none = joint_search(swap, qs, 1L << 40);
    EXPECT_FALSE(none.found);
    EXPECT_FALSE(none.gave_up);
    const MapfInstance open(GridMap(6, 6), {{{0, 0}, {5, 5}}, {{5, 5}, {0, 0}}});
    const JointPlan cut = joint_search(open, qs, 3);
    EXPECT_FALSE(cut.found);
    EXPECT_TRUE(cut.gave_up);
}

TEST(LowLevel, RangeAndLengthConstraints) {
    const MapfInstance inst(GridMap(5, 1), {{{0, 0}, {0, 4}}});
    LowLevelQuery q;
    Constraint range;
    range.kind = Constraint::Kind::Range;
    range.location = 2;
    range.timestep = 1;
    range.until = 5;
    q.constraints.push_back(range);
    auto p = low_level_search(inst, q);
    ASSERT_TRUE(p);
    EXPECT_EQ(p->cost, 8);  // tile 2 at t = 6 at the earliest, then two more steps
    EXPECT_EQ(at(p->path, 6), 2);

    q.constraints.clear();
    Constraint length;
    length.kind = Constraint::Kind::Length;
    length.timestep = 9;
    q.constraints.push_back(length);
    p = low_level_search(inst, q);
    ASSERT_TRUE(p);
    EXPECT_EQ(p->cost, 9);

    q.constraints.clear();
    range.location = 4;
    range.until = Constraint::kForever;
    q.constraints.push_back(range);
    EXPECT_FALSE(low_level_search(inst, q));  // goal closed for good
}

TEST(LowLevel, OptimalUnderRandomConstraints) {
    std::mt19937_64 rng(34);
    for (int k = 0; k < 300; ++k) {
        const MapfInstance inst = random_pair_instance(rng);
        LowLevelQuery q;
        for (int i = 0; i < 3; ++i) q.constraints.push_back(random_constraint(rng, inst.map(), 0));
        const auto p = low_level_search(inst, q);
        const int d = bfs_distances(inst.map(), inst.start_index(0))[inst.goal_index(0)];
        int best = -1;
        for (int cost = d; cost <= d + 12 && best < 0; ++cost) {
            if (!enumerate_paths(inst, 0, q.constraints, cost).empty()) best = cost;
        }
        if (best < 0) continue;  // nothing short enough to enumerate
        ASSERT_TRUE(p) << k;
        EXPECT_EQ(p->cost, best) << k;
        EXPECT_TRUE(satisfies(p->path, q.constraints, 64)) << k;
    }
}
