#pragma once

#include <string>
#include <vector>

#include "mapgen/grid_map.hpp"

namespace mapgen {

enum class NcaSeed { CenterObstacle, AllEmpty };

std::string to_string(NcaSeed seed);
NcaSeed parse_nca_seed(const std::string& text);

/// 3x3 convolution c -> h with bias, ReLU, 1x1 convolution h -> c with bias, residual add,
/// clamp to [-10, 10]. Channels 0 and 1 are the Empty and Obstacle logits.
struct NcaArchitecture {
    int state_channels = 8;
    int hidden_channels = 32;
    int steps = 30;
    NcaSeed seed = NcaSeed::CenterObstacle;

    void validate() const;
    friend bool operator==(const NcaArchitecture&, const NcaArchitecture&) = default;
};

/// 9*c*h + h + h*c + c.
int param_count(const NcaArchitecture& arch);

/// Parameter layout: conv1 weights [h][c][3][3], conv1 bias [h], conv2 weights [c][h], conv2 bias [c].
class NcaGenome {
public:
    NcaGenome(NcaArchitecture arch, std::vector<double> theta);

    const NcaArchitecture& arch() const { return arch_; }
    const std::vector<double>& theta() const { return theta_; }

private:
    NcaArchitecture arch_;
    std::vector<double> theta_;
};

/// Runs the automaton and decodes Obstacle iff the channel-1 logit exceeds the channel-0 logit.
/// The output may be disconnected or have any obstacle count. Serial reference kernel.
GridMap generate(const NcaGenome& genome, int width, int height);
/// Same result bit for bit, with each step's pixels split over OpenMP threads.
GridMap generate_parallel(const NcaGenome& genome, int width, int height, int threads = 0);

}  // namespace mapgen
