#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "mapgen/repair.hpp"
#include "oracles.hpp"

using namespace mapgen;

namespace {

GridMap from_rows(const std::vector<std::string>& rows) {
    GridMap m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
    for (int r = 0; r < m.height(); ++r) {
        for (int c = 0; c < m.width(); ++c) m.set(Cell{r, c}, rows[r][c] == '@' ? Tile::Obstacle : Tile::Empty);
    }
    return m;
}

int obstacles(const GridMap& m) { return m.size() - m.count_empty(); }

bool connected(const GridMap& m) {
    const int empty = m.count_empty();
    return empty > 0 && oracle::largest_region(m).count_empty() == empty;
}

}  // namespace

TEST(Repair, ValidInRangeInputUnchanged) {
    const GridMap m = from_rows({"..@.", "....", ".@@.", "...."});
    EXPECT_EQ(repair(m, 0, 15), m);
    EXPECT_EQ(repair(m, 3, 3), m);
}

TEST(Repair, SplitRegionsAreJoined) {
    const GridMap m = from_rows({".@.", ".@.", ".@."});
    const GridMap out = repair(m, 0, 8);
    EXPECT_TRUE(connected(out));
    // Equal-size regions: the one reached first in row-major order survives.
    EXPECT_EQ(out, from_rows({".@@", ".@@", ".@@"}));
}

TEST(Repair, AllObstacleInput) {
    const GridMap out = repair(GridMap(5, 5, Tile::Obstacle), 7, 17);
    EXPECT_TRUE(is_valid(out));
    EXPECT_GE(obstacles(out), 7);
    EXPECT_LE(obstacles(out), 17);
}

TEST(Repair, GoldenOpening) {
    // Seed at the center, then open the obstacle with most Empty neighbors, ties row-major.
    EXPECT_EQ(repair(GridMap(3, 3, Tile::Obstacle), 0, 8), from_rows({"@@@", "@.@", "@@@"}));
    EXPECT_EQ(repair(GridMap(3, 3, Tile::Obstacle), 0, 4), from_rows({"...", "..@", "@@@"}));
}

TEST(Repair, GoldenClosing) {
    // Close the Empty tile with fewest obstacle neighbors that keeps the rest connected.
    EXPECT_EQ(repair(GridMap(3, 3), 2, 2), from_rows({"@.@", "...", "..."}));
    EXPECT_EQ(repair(from_rows({"...", "@@.", "..."}), 4, 5), from_rows({"@..", "@@.", "@.."}));
}

TEST(Repair, NeverCutsTheCorridor) {
    // Every interior tile of a 1-wide snake is an articulation point; only the ends may close.
    const GridMap snake = from_rows({".....", "@@@@.", ".....", ".@@@@", "....."});
    const GridMap out = repair(snake, 10, 10);
    EXPECT_TRUE(is_valid(out));
    EXPECT_EQ(obstacles(out), 10);
    EXPECT_EQ(out.at(Cell{0, 0}), Tile::Obstacle);
    EXPECT_EQ(out.at(Cell{4, 4}), Tile::Obstacle);
    EXPECT_EQ(out.at(Cell{0, 1}), Tile::Empty);  // two obstacle neighbors after the first closure
}

TEST(Repair, Errors) {
    const GridMap m(3, 3);
    EXPECT_THROW(repair(m, 5, 4), MapError);
    EXPECT_THROW(repair(m, -1, 4), MapError);
    EXPECT_THROW(repair(m, 0, 9), MapError);
    EXPECT_NO_THROW(repair(m, 8, 8));
    EXPECT_EQ(repair(m, 8, 8).count_empty(), 1);
}

TEST(Repair, ContractOnRandomMaps) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> density(0.0, 1.0);
    for (int k = 0; k < 150; ++k) {
        const GridMap raw = oracle::random_raw_map(rng, 32, 32, density(rng));
        const GridMap out = repair(raw, 307, 717);
        ASSERT_TRUE(connected(out)) << k;
        EXPECT_GE(obstacles(out), 307);
        EXPECT_LE(obstacles(out), 717);
        EXPECT_EQ(repair(out, 307, 717), out);
        EXPECT_EQ(repair(raw, 307, 717), out);
    }
}

TEST(Repair, ContractOnOddShapesAndRanges) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 300; ++k) {
        const int w = 1 + static_cast<int>(rng() % 9), h = 1 + static_cast<int>(rng() % 9);
        const GridMap raw = oracle::random_raw_map(rng, w, h, 0.1 * static_cast<double>(rng() % 10));
        const int cells = w * h;
        const int lo = static_cast<int>(rng() % static_cast<std::uint64_t>(cells));
        const int hi = lo + static_cast<int>(rng() % static_cast<std::uint64_t>(cells - lo));
        const GridMap out = repair(raw, lo, hi);
        ASSERT_TRUE(connected(out)) << k;
        EXPECT_GE(obstacles(out), lo);
        EXPECT_LE(obstacles(out), hi);
        EXPECT_EQ(repair(out, lo, hi), out);
    }
}

TEST(Similarity, Examples) {
    const GridMap a(4, 4);
    EXPECT_DOUBLE_EQ(similarity(a, a), 1.0);
    EXPECT_DOUBLE_EQ(similarity(a, GridMap(4, 4, Tile::Obstacle)), 0.0);
    GridMap b = a;
    b.set(Cell{2, 3}, Tile::Obstacle);
    EXPECT_DOUBLE_EQ(similarity(a, b), 0.9375);
    EXPECT_THROW(similarity(a, GridMap(4, 3)), MapError);
}
