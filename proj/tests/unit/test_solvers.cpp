#include <gtest/gtest.h>

#include <random>

#include "mapgen/solvers.hpp"
#include "oracles.hpp"
#include "solver_oracles.hpp"

using namespace mapgen;

namespace {

GridMap from_rows(const std::vector<std::string>& rows) {
    GridMap m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
    for (int r = 0; r < m.height(); ++r) {
        for (int c = 0; c < m.width(); ++c) m.set(Cell{r, c}, rows[r][c] == '@' ? Tile::Obstacle : Tile::Empty);
    }
    return m;
}

IndexPath to_index(const GridMap& m, const Path& p) {
    IndexPath out;
    for (const Cell c : p) out.push_back(m.index(c));
    return out;
}

}  // namespace

TEST(Validate, DetectsConflicts) {
    const GridMap m(3, 3);
    const MapfInstance disjoint(m, {{{0, 0}, {0, 2}}, {{2, 0}, {2, 2}}});
    EXPECT_TRUE(validate_paths(disjoint, {{{0, 0}, {0, 1}, {0, 2}}, {{2, 0}, {2, 1}, {2, 2}}}).empty());

    const GridMap big(4, 4);
    const MapfInstance meet(big, {{{0, 1}, {1, 1}}, {{2, 1}, {1, 2}}});
    const std::vector<Path> vertex{{{0, 1}, {0, 1}, {0, 1}, {1, 1}}, {{2, 1}, {2, 1}, {2, 1}, {1, 1}, {1, 2}}};
    const auto c = validate_paths(meet, vertex);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].kind, ConflictKind::Vertex);
    EXPECT_EQ(c[0].timestep, 3);
    EXPECT_EQ(c[0].cell_a, (Cell{1, 1}));

    const MapfInstance swap(GridMap(2, 1), {{{0, 0}, {0, 1}}, {{0, 1}, {0, 0}}});
    const std::vector<Path> swapping{{{0, 0}, {0, 0}, {0, 0}, {0, 1}}, {{0, 1}, {0, 1}, {0, 1}, {0, 0}}};
    const auto e = validate_paths(swap, swapping);
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e[0].kind, ConflictKind::Edge);
    EXPECT_EQ(e[0].timestep, 3);
}

TEST(Validate, GoalWaitPadding) {
    const GridMap m(3, 1);
    const MapfInstance inst(m, {{{0, 0}, {0, 1}}, {{0, 2}, {0, 0}}});
    // Agent 0 stops at (0,1); agent 1 passes through it later.
    const auto c = validate_paths(inst, {{{0, 0}, {0, 1}}, {{0, 2}, {0, 2}, {0, 2}, {0, 1}, {0, 0}}});
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].timestep, 3);
}

TEST(Validate, RejectsIllegalPaths) {
    GridMap m(3, 1);
    m.set(Cell{0, 1}, Tile::Obstacle);
    const MapfInstance inst(GridMap(3, 1), {{{0, 0}, {0, 2}}});
    EXPECT_THROW(validate_paths(inst, {{{0, 0}, {0, 2}}}), MapError);            // jump
    EXPECT_THROW(validate_paths(inst, {{{0, 1}, {0, 2}}}), MapError);            // wrong start
    EXPECT_THROW(validate_paths(inst, {{{0, 0}, {1, 0}}}), MapError);            // off map
    const MapfInstance blocked(m, {{{0, 0}, {0, 2}}});
    EXPECT_THROW(validate_paths(blocked, {{{0, 0}, {0, 1}, {0, 2}}}), MapError);  // obstacle
}

TEST(PathCost, TrailingWaitsAreFree) {
    EXPECT_EQ(path_cost({{0, 0}, {0, 1}, {0, 1}, {0, 1}}), 1);
    EXPECT_EQ(path_cost({{0, 0}, {0, 0}, {0, 1}}), 2);
    EXPECT_EQ(path_cost({{0, 0}}), 0);
}

TEST(LowLevel, Corridor) {
    const MapfInstance inst(GridMap(4, 1), {{{0, 0}, {0, 3}}});
    LowLevelQuery q;
    auto free = low_level_search(inst, q);
    ASSERT_TRUE(free);
    EXPECT_EQ(free->cost, 3);

    q.constraints.push_back({Constraint::Kind::Vertex, 0, 1, 0, 1});
    auto waited = low_level_search(inst, q);
    ASSERT_TRUE(waited);
    EXPECT_EQ(waited->cost, 4);
    EXPECT_EQ(waited->path, (IndexPath{0, 0, 1, 2, 3}));
}

TEST(LowLevel, GoalConstraintLaterForcesLongerPath) {
    const MapfInstance inst(GridMap(4, 1), {{{0, 0}, {0, 2}}});
    LowLevelQuery q;
    q.constraints.push_back({Constraint::Kind::Vertex, 0, 2, 0, 5});
    auto p = low_level_search(inst, q);
    ASSERT_TRUE(p);
    EXPECT_EQ(p->cost, 6);  // must step off the goal at t=5 and come back
}

TEST(LowLevel, UnconstrainedEqualsBfsDistance) {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 100; ++k) {
        const GridMap m = oracle::random_valid_map(rng, 8, 8, 0.3, 2);
        const auto tiles = oracle::empty_tiles(m);
        const int s = tiles[rng() % tiles.size()], g = tiles[rng() % tiles.size()];
        const MapfInstance inst(m, {{m.cell(s), m.cell(g)}});
        for (double w : {1.0, 1.5}) {
            LowLevelQuery q;
            q.focal_w = w;
            const auto p = low_level_search(inst, q);
            ASSERT_TRUE(p);
            const int d = bfs_distances(m, s)[g];
            if (w == 1.0) {
                EXPECT_EQ(p->cost, d);
            } else {
                EXPECT_LE(p->cost, 1.5 * d);
            }
        }
    }
}

TEST(LowLevel, InfeasibleReturnsNone) {
    const MapfInstance inst(GridMap(3, 1), {{{0, 0}, {0, 2}}});
    LowLevelQuery q;
    IndexPath blocker{1};  // parked on the middle tile forever
    q.hard_paths.push_back(&blocker);
    EXPECT_FALSE(low_level_search(inst, q));
}

TEST(Cbs, SingleAgentCostIsDistance) {
    const MapfInstance inst(GridMap(6, 6), {{{0, 0}, {5, 3}}});
    const auto s = solve_cbs(inst, 1.0, 5.0);
    EXPECT_EQ(s.status, SolveStatus::Solved);
    EXPECT_EQ(s.sum_of_cost, 8);
}

TEST(Cbs, ExchangeOnOpenMapMatchesOracle) {
    const MapfInstance inst(GridMap(3, 3), {{{0, 0}, {2, 2}}, {{2, 2}, {0, 0}}});
    const auto s = solve_cbs(inst, 1.0, 5.0);
    ASSERT_EQ(s.status, SolveStatus::Solved);
    EXPECT_EQ(s.sum_of_cost, *joint_state_oracle(inst));
    EXPECT_TRUE(validate_solution(inst, s).empty());
}

TEST(Cbs, CorridorSwapTimesOut) {
    const MapfInstance inst(GridMap(5, 1), {{{0, 0}, {0, 4}}, {{0, 4}, {0, 0}}});
    const auto s = solve_cbs(inst, 1.0, 0.5);
    EXPECT_EQ(s.status, SolveStatus::Timeout);
    EXPECT_DOUBLE_EQ(s.cpu_runtime, 0.5);
}

TEST(Cbs, MatchesOracleOnRandomInstances) {
    std::mt19937_64 rng(1234);
    for (int k = 0; k < 60; ++k) {
        const auto inst = oracle::random_small_instance(rng);
        const auto opt = joint_state_oracle(inst);
        ASSERT_TRUE(opt);
        const auto s = solve_cbs(inst, 1.0, 10.0);
        ASSERT_EQ(s.status, SolveStatus::Solved) << k;
        EXPECT_EQ(s.sum_of_cost, *opt) << k;
        EXPECT_TRUE(validate_solution(inst, s).empty());
        const auto b = solve_cbs(inst, 1.5, 10.0);
        ASSERT_EQ(b.status, SolveStatus::Solved);
        EXPECT_LE(static_cast<double>(b.sum_of_cost), 1.5 * static_cast<double>(*opt));
        EXPECT_TRUE(validate_solution(inst, b).empty());
    }
}

TEST(Cbs, Deterministic) {
    const GridMap m(8, 8);
    const auto inst = generate_instance(m, 10, 3);
    const auto a = solve_cbs(inst, 1.5, 10.0);
    const auto b = solve_cbs(inst, 1.5, 10.0);
    ASSERT_EQ(a.status, SolveStatus::Solved);
    EXPECT_EQ(a.paths, b.paths);
}

TEST(Cbs, BoundedSuboptimalOnLargerInstances) {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 10; ++k) {
        const GridMap m = oracle::random_valid_map(rng, 12, 12, 0.2, 60);
        const auto inst = generate_instance(m, 12, static_cast<std::uint64_t>(k));
        const auto opt = solve_cbs(inst, 1.0, 5.0);
        const auto sub = solve_cbs(inst, 1.5, 5.0);
        if (sub.status == SolveStatus::Solved) {
            EXPECT_TRUE(validate_solution(inst, sub).empty());
        }
        if (opt.status == SolveStatus::Solved && sub.status == SolveStatus::Solved) {
            EXPECT_LE(static_cast<double>(sub.sum_of_cost), 1.5 * static_cast<double>(opt.sum_of_cost));
            EXPECT_GE(sub.sum_of_cost, opt.sum_of_cost);
        }
    }
}

TEST(Pbs, SingleAgent) {
    const MapfInstance inst(GridMap(5, 5), {{{0, 0}, {4, 4}}});
    const auto s = solve_pbs(inst, 5.0);
    EXPECT_EQ(s.status, SolveStatus::Solved);
    EXPECT_EQ(s.sum_of_cost, 8);
}

TEST(Pbs, CrossingWithPassingCell) {
    // Corridor with one recess above column 5.
    const GridMap m = from_rows({"@@@@@.@", "......."});
    const MapfInstance inst(m, {{{1, 0}, {1, 6}}, {{1, 6}, {1, 0}}});
    const auto s = solve_pbs(inst, 5.0);
    ASSERT_EQ(s.status, SolveStatus::Solved);
    EXPECT_TRUE(validate_solution(inst, s).empty());
    // Hand check of both orders: with agent 1 on top, agent 0 cannot reach the recess before
    // agent 1 passes it. With agent 0 on top it walks straight (6); agent 1 steps into the
    // recess at t=2, waits until agent 0 has passed, and arrives at t=11.
    EXPECT_EQ(s.sum_of_cost, 6 + 11);
}

TEST(Pbs, DeadEndCorridorHasNoSolution) {
    const MapfInstance inst(GridMap(5, 1), {{{0, 1}, {0, 4}}, {{0, 3}, {0, 0}}});
    const auto s = solve_pbs(inst, 5.0);
    EXPECT_EQ(s.status, SolveStatus::NoSolution);
}

TEST(Pbs, PathsAreOptimalUnderFinalPriorities) {
    std::mt19937_64 rng(77);
    int solved = 0;
    for (int k = 0; k < 15; ++k) {
        const GridMap m = oracle::random_valid_map(rng, 10, 10, 0.2, 50);
        const auto inst = generate_instance(m, 10, static_cast<std::uint64_t>(k));
        const auto res = solve_pbs_detailed(inst, 5.0);
        if (res.solution.status != SolveStatus::Solved) continue;
        ++solved;
        EXPECT_TRUE(validate_solution(inst, res.solution).empty());
        std::vector<IndexPath> paths;
        for (const auto& p : res.solution.paths) paths.push_back(to_index(m, p));
        for (int a = 0; a < inst.num_agents(); ++a) {
            LowLevelQuery q;
            q.agent = a;
            for (int h : res.higher[a]) q.hard_paths.push_back(&paths[h]);
            const auto p = low_level_search(inst, q);
            ASSERT_TRUE(p);
            EXPECT_EQ(p->cost, path_cost(res.solution.paths[a])) << "agent " << a;
        }
    }
    EXPECT_GT(solved, 5);
}

TEST(Pibt, SingleAgent) {
    const MapfInstance inst(GridMap(6, 1), {{{0, 0}, {0, 5}}});
    const auto r = solve_pibt(inst, 100);
    EXPECT_EQ(r.success_rate, 1.0);
    EXPECT_EQ(r.trajectories[0].size(), 6u);
}

TEST(Pibt, HeadOnWithRecess) {
    // Trace of the rule: agent 0 has priority. At t=3 agent 1 yields, at t=4 and t=5 it is pushed
    // back by inheritance, the second time into the recess (Up is first among equally distant
    // candidates). Agent 0 reaches its goal at t=6 and agent 1 walks out afterwards.
    const GridMap m = from_rows({"@@@@@.@", "......."});
    const MapfInstance inst(m, {{{1, 0}, {1, 6}}, {{1, 6}, {1, 0}}});
    const auto r = solve_pibt(inst, 64);
    EXPECT_EQ(r.success_rate, 1.0);
    EXPECT_TRUE(validate_paths(inst, r.trajectories).empty());
    EXPECT_EQ(r.trajectories[1][5], (Cell{0, 5}));
    EXPECT_EQ(r.trajectories[0][6], (Cell{1, 6}));
}

TEST(Pibt, CorridorSwapFails) {
    const MapfInstance inst(GridMap(7, 1), {{{0, 0}, {0, 6}}, {{0, 6}, {0, 0}}});
    const auto r = solve_pibt(inst, 128);
    EXPECT_LT(r.success_rate, 1.0);
    EXPECT_EQ(r.trajectories[0].size(), 129u);
    EXPECT_TRUE(validate_paths(inst, r.trajectories).empty());
}

TEST(Pibt, NeverCollidesOnRandomInstances) {
    std::mt19937_64 rng(31);
    for (int k = 0; k < 30; ++k) {
        const GridMap m = oracle::random_valid_map(rng, 12, 12, 0.3, 50);
        const auto inst = generate_instance(m, 15, static_cast<std::uint64_t>(k));
        const auto r = solve_pibt(inst, 200);
        EXPECT_TRUE(validate_paths(inst, r.trajectories).empty());
        int ok = 0;
        for (bool f : r.success_flags) ok += f ? 1 : 0;
        EXPECT_DOUBLE_EQ(r.success_rate, ok / 15.0);
        for (const auto& t : r.trajectories) EXPECT_EQ(t.size(), r.trajectories[0].size());
    }
}

TEST(Oracle, SimpleCases) {
    EXPECT_EQ(*joint_state_oracle(MapfInstance(GridMap(5, 1), {{{0, 0}, {0, 3}}})), 3);
    EXPECT_EQ(*joint_state_oracle(MapfInstance(GridMap(3, 3), {{{0, 0}, {0, 0}}, {{1, 1}, {1, 1}}})), 0);
    EXPECT_FALSE(joint_state_oracle(MapfInstance(GridMap(4, 1), {{{0, 0}, {0, 3}}, {{0, 3}, {0, 0}}})));
    EXPECT_THROW(joint_state_oracle(MapfInstance(GridMap(7, 7), {{{0, 0}, {0, 3}}})), MapError);
}
