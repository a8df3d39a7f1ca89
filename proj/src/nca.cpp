#include "mapgen/nca.hpp"

#include <algorithm>
#include <stdexcept>

#include <omp.h>

namespace mapgen {

std::string to_string(NcaSeed seed) { return seed == NcaSeed::CenterObstacle ? "center_obstacle" : "all_empty"; }

NcaSeed parse_nca_seed(const std::string& text) {
    if (text == "center_obstacle") return NcaSeed::CenterObstacle;
    if (text == "all_empty") return NcaSeed::AllEmpty;
    throw std::invalid_argument("unknown NCA seed '" + text + "'");
}

void NcaArchitecture::validate() const {
    if (state_channels < 2) throw std::invalid_argument("NCA needs at least 2 state channels");
    if (hidden_channels < 1) throw std::invalid_argument("NCA needs at least 1 hidden channel");
    if (steps < 1) throw std::invalid_argument("NCA needs at least 1 step");
}

int param_count(const NcaArchitecture& arch) {
    const int c = arch.state_channels;
    const int h = arch.hidden_channels;
    return 9 * c * h + h + h * c + c;
}

NcaGenome::NcaGenome(NcaArchitecture arch, std::vector<double> theta) : arch_(arch), theta_(std::move(theta)) {
    arch_.validate();
    if (static_cast<int>(theta_.size()) != param_count(arch_)) {
        throw std::invalid_argument("genome has " + std::to_string(theta_.size()) + " parameters, architecture needs " +
                                    std::to_string(param_count(arch_)));
    }
}

namespace {

struct Kernel {
    int c, h, width, height;
    const double* w1;
    const double* b1;
    const double* w2;
    const double* b2;

    Kernel(const NcaGenome& g, int w, int ht)
        : c(g.arch().state_channels), h(g.arch().hidden_channels), width(w), height(ht) {
        w1 = g.theta().data();
        b1 = w1 + 9 * c * h;
        w2 = b1 + h;
        b2 = w2 + h * c;
    }

    // State layout [channel][row][col]. Accumulation order is fixed: bias, then channel, dy, dx.
    void update_pixel(const double* in, double* out, int y, int x, double* hidden) const {
        const int plane = width * height;
        for (int k = 0; k < h; ++k) {
            double acc = b1[k];
            const double* wk = w1 + k * c * 9;
            for (int ch = 0; ch < c; ++ch) {
                for (int dy = 0; dy < 3; ++dy) {
                    const int yy = y + dy - 1;
                    if (yy < 0 || yy >= height) continue;
                    for (int dx = 0; dx < 3; ++dx) {
                        const int xx = x + dx - 1;
                        if (xx < 0 || xx >= width) continue;
                        acc += wk[ch * 9 + dy * 3 + dx] * in[ch * plane + yy * width + xx];
                    }
                }
            }
            hidden[k] = std::max(acc, 0.0);
        }
        for (int ch = 0; ch < c; ++ch) {
            double acc = b2[ch];
            for (int k = 0; k < h; ++k) acc += w2[ch * h + k] * hidden[k];
            const int i = ch * plane + y * width + x;
            out[i] = std::clamp(in[i] + acc, -10.0, 10.0);
        }
    }
};

std::vector<double> initial_state(const NcaArchitecture& arch, int width, int height) {
    std::vector<double> s(static_cast<std::size_t>(arch.state_channels) * width * height, 0.0);
    if (arch.seed == NcaSeed::CenterObstacle) s[static_cast<std::size_t>(width * height + (height / 2) * width + width / 2)] = 1.0;
    return s;
}

GridMap decode(const std::vector<double>& state, int width, int height) {
    GridMap map(width, height, Tile::Empty);
    const int plane = width * height;
    for (int i = 0; i < plane; ++i) {
        if (state[static_cast<std::size_t>(plane + i)] > state[static_cast<std::size_t>(i)]) map.set(i, Tile::Obstacle);
    }
    return map;
}

void check_size(int width, int height) {
    if (width < 3 || height < 3) throw MapError("NCA maps must be at least 3x3");
}

}  // namespace

GridMap generate(const NcaGenome& genome, int width, int height) {
    check_size(width, height);
    const Kernel kernel(genome, width, height);
    std::vector<double> cur = initial_state(genome.arch(), width, height);
    std::vector<double> next(cur.size());
    std::vector<double> hidden(static_cast<std::size_t>(kernel.h));
    for (int step = 0; step < genome.arch().steps; ++step) {
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) kernel.update_pixel(cur.data(), next.data(), y, x, hidden.data());
        }
        cur.swap(next);
    }
    return decode(cur, width, height);
}

GridMap generate_parallel(const NcaGenome& genome, int width, int height, int threads) {
    check_size(width, height);
    const Kernel kernel(genome, width, height);
    std::vector<double> cur = initial_state(genome.arch(), width, height);
    std::vector<double> next(cur.size());
    const int pixels = width * height;
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
    for (int step = 0; step < genome.arch().steps; ++step) {
#pragma omp parallel num_threads(nthreads)
        {
            std::vector<double> hidden(static_cast<std::size_t>(kernel.h));
#pragma omp for schedule(static)
            for (int p = 0; p < pixels; ++p) kernel.update_pixel(cur.data(), next.data(), p / width, p % width, hidden.data());
        }
        cur.swap(next);
    }
    return decode(cur, width, height);
}

}  // namespace mapgen
