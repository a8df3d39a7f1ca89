#include <gtest/gtest.h>

#include <random>

#include "mapgen/nca.hpp"

using namespace mapgen;

namespace {

NcaGenome random_genome(NcaArchitecture arch, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    std::vector<double> theta(static_cast<std::size_t>(param_count(arch)));
    for (double& t : theta) t = normal(rng);
    return NcaGenome(arch, theta);
}

// Straightforward tensor forward pass, indexed [y][x][ch] and looping pixels innermost.
GridMap reference_forward(const NcaGenome& g, int width, int height) {
    const auto& a = g.arch();
    const int c = a.state_channels, h = a.hidden_channels;
    const auto& th = g.theta();
    auto w1 = [&](int k, int ch, int dy, int dx) { return th[static_cast<std::size_t>(((k * c + ch) * 3 + dy) * 3 + dx)]; };
    auto b1 = [&](int k) { return th[static_cast<std::size_t>(9 * c * h + k)]; };
    auto w2 = [&](int ch, int k) { return th[static_cast<std::size_t>(9 * c * h + h + ch * h + k)]; };
    auto b2 = [&](int ch) { return th[static_cast<std::size_t>(9 * c * h + h + h * c + ch)]; };

    using Field = std::vector<std::vector<std::vector<double>>>;
    Field s(static_cast<std::size_t>(height), std::vector<std::vector<double>>(static_cast<std::size_t>(width), std::vector<double>(static_cast<std::size_t>(c), 0.0)));
    if (a.seed == NcaSeed::CenterObstacle) s[static_cast<std::size_t>(height / 2)][static_cast<std::size_t>(width / 2)][1] = 1.0;
    for (int step = 0; step < a.steps; ++step) {
        Field hid(static_cast<std::size_t>(height), std::vector<std::vector<double>>(static_cast<std::size_t>(width), std::vector<double>(static_cast<std::size_t>(h), 0.0)));
        for (int k = 0; k < h; ++k) {
            for (int y = 0; y < height; ++y) {
                for (int x = 0; x < width; ++x) {
                    double acc = b1(k);
                    for (int ch = 0; ch < c; ++ch) {
                        for (int dy = -1; dy <= 1; ++dy) {
                            for (int dx = -1; dx <= 1; ++dx) {
                                const int yy = y + dy, xx = x + dx;
                                const double v = yy < 0 || yy >= height || xx < 0 || xx >= width ? 0.0 : s[static_cast<std::size_t>(yy)][static_cast<std::size_t>(xx)][static_cast<std::size_t>(ch)];
                                acc += w1(k, ch, dy + 1, dx + 1) * v;
                            }
                        }
                    }
                    hid[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)][static_cast<std::size_t>(k)] = acc > 0 ? acc : 0.0;
                }
            }
        }
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                auto& px = s[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
                for (int ch = 0; ch < c; ++ch) {
                    double acc = b2(ch);
                    for (int k = 0; k < h; ++k) acc += w2(ch, k) * hid[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)][static_cast<std::size_t>(k)];
                    px[static_cast<std::size_t>(ch)] = std::min(10.0, std::max(-10.0, px[static_cast<std::size_t>(ch)] + acc));
                }
            }
        }
    }
    GridMap m(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto& px = s[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
            m.set(Cell{y, x}, px[1] > px[0] ? Tile::Obstacle : Tile::Empty);
        }
    }
    return m;
}

}  // namespace

TEST(Nca, ParamCount) {
    EXPECT_EQ(param_count(NcaArchitecture{}), 2600);
    EXPECT_EQ(param_count(NcaArchitecture{2, 1, 1, NcaSeed::AllEmpty}), 23);
}

TEST(Nca, GenomeChecksLengthAndArchitecture) {
    const NcaArchitecture arch{2, 1, 1, NcaSeed::AllEmpty};
    EXPECT_THROW(NcaGenome(arch, std::vector<double>(22)), std::invalid_argument);
    EXPECT_THROW(NcaGenome(arch, std::vector<double>(24)), std::invalid_argument);
    EXPECT_NO_THROW(NcaGenome(arch, std::vector<double>(23)));
    EXPECT_THROW(NcaGenome(NcaArchitecture{1, 1, 1, NcaSeed::AllEmpty}, std::vector<double>(12)), std::invalid_argument);
    EXPECT_THROW(NcaGenome(NcaArchitecture{2, 0, 1, NcaSeed::AllEmpty}, std::vector<double>(2)), std::invalid_argument);
    EXPECT_THROW(NcaGenome(NcaArchitecture{2, 1, 0, NcaSeed::AllEmpty}, std::vector<double>(23)), std::invalid_argument);
}

TEST(Nca, SeedNames) {
    EXPECT_EQ(parse_nca_seed(to_string(NcaSeed::CenterObstacle)), NcaSeed::CenterObstacle);
    EXPECT_EQ(parse_nca_seed(to_string(NcaSeed::AllEmpty)), NcaSeed::AllEmpty);
    EXPECT_THROW(parse_nca_seed("middle"), std::invalid_argument);
}

TEST(Nca, ZeroGenomeAllEmptyGivesEmptyMap) {
    NcaArchitecture arch;
    arch.seed = NcaSeed::AllEmpty;
    const GridMap m = generate(NcaGenome(arch, std::vector<double>(2600, 0.0)), 32, 32);
    EXPECT_EQ(m.count_empty(), 32 * 32);
}

TEST(Nca, ZeroGenomeKeepsCenterSeed) {
    const GridMap m = generate(NcaGenome(NcaArchitecture{}, std::vector<double>(2600, 0.0)), 5, 4);
    EXPECT_EQ(m.count_empty(), 19);
    EXPECT_EQ(m.at(Cell{2, 2}), Tile::Obstacle);
}

TEST(Nca, HandComputedSingleStep) {
    // c=2, h=1 on 3x3 with the seed at (1,1). Hidden unit reads channel 1 of the right neighbor,
    // so it fires only at (1,0). Then ch0 = 0.5 - hidden, ch1 += 2 * hidden.
    std::vector<double> theta(23, 0.0);
    theta[9 + 1 * 3 + 2] = 1.0;  // w1[0][1][dy=1][dx=2]
    theta[19] = -1.0;            // w2[0][0]
    theta[20] = 2.0;             // w2[1][0]
    theta[21] = 0.5;             // b2[0]
    const GridMap m = generate(NcaGenome(NcaArchitecture{2, 1, 1, NcaSeed::CenterObstacle}, theta), 3, 3);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const bool obstacle = r == 1 && (c == 0 || c == 1);
            EXPECT_EQ(m.at(Cell{r, c}), obstacle ? Tile::Obstacle : Tile::Empty) << r << "," << c;
        }
    }
}

TEST(Nca, ClampBoundsTheState) {
    // Biases 10.5 and 12 would decode Obstacle unclamped; both clamp to 10 and the tie decodes Empty.
    std::vector<double> theta(23, 0.0);
    theta[21] = 10.5;
    theta[22] = 12.0;
    EXPECT_EQ(generate(NcaGenome(NcaArchitecture{2, 1, 1, NcaSeed::AllEmpty}, theta), 3, 3).count_empty(), 9);
    theta[21] = 9.99;
    EXPECT_EQ(generate(NcaGenome(NcaArchitecture{2, 1, 1, NcaSeed::AllEmpty}, theta), 3, 3).count_empty(), 0);
}

TEST(Nca, MatchesReferenceForwardPass) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        NcaArchitecture arch{3 + static_cast<int>(seed % 3), 4 + static_cast<int>(seed % 5), 1 + static_cast<int>(seed % 6),
                             seed % 2 ? NcaSeed::AllEmpty : NcaSeed::CenterObstacle};
        const NcaGenome g = random_genome(arch, seed, 0.4);
        const int w = 3 + static_cast<int>(seed % 7), h = 3 + static_cast<int>((seed * 5) % 8);
        EXPECT_EQ(generate(g, w, h), reference_forward(g, w, h)) << "seed " << seed;
    }
}

TEST(Nca, DeterministicAcrossRunsAndThreads) {
    const NcaGenome g = random_genome(NcaArchitecture{}, 7, 0.2);
    const GridMap serial = generate(g, 32, 32);
    EXPECT_EQ(generate(g, 32, 32), serial);
    for (int threads : {1, 2, 3, 8}) EXPECT_EQ(generate_parallel(g, 32, 32, threads), serial) << threads;
    EXPECT_EQ(generate(g, 17, 9).width(), 17);
    EXPECT_EQ(generate(g, 17, 9).height(), 9);
}

TEST(Nca, SeedMatters) {
    NcaArchitecture arch;
    const NcaGenome centered = random_genome(arch, 21, 0.3);
    arch.seed = NcaSeed::AllEmpty;
    const NcaGenome blank(arch, centered.theta());
    EXPECT_NE(generate(centered, 16, 16), generate(blank, 16, 16));
}

TEST(Nca, RejectsTinyMaps) {
    const NcaGenome g(NcaArchitecture{2, 1, 1, NcaSeed::AllEmpty}, std::vector<double>(23));
    EXPECT_THROW(generate(g, 2, 5), MapError);
    EXPECT_THROW(generate_parallel(g, 5, 2), MapError);
}
