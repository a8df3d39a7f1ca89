#include <algorithm>
#include <cstdlib>
#include <ctime>

#include "mapgen/solvers.hpp"

namespace mapgen {

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Solved: return "Solved";
        case SolveStatus::Timeout: return "Timeout";
        case SolveStatus::NoSolution: return "NoSolution";
    }
    return "Unknown";
}

double thread_cpu_seconds() {
    timespec ts{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

Deadline::Deadline(double seconds) : start_(thread_cpu_seconds()), limit_(seconds) {}
bool Deadline::expired() const { return elapsed() >= limit_; }
double Deadline::elapsed() const { return thread_cpu_seconds() - start_; }

long path_cost(const Path& path) {
    if (path.empty()) return 0;
    long t = static_cast<long>(path.size()) - 1;
    while (t > 0 && path[static_cast<std::size_t>(t - 1)] == path.back()) --t;
    return t;
}

Path to_cells(const GridMap& map, const IndexPath& path) {
    Path out;
    out.reserve(path.size());
    for (int loc : path) out.push_back(map.cell(loc));
    return out;
}

std::vector<Conflict> validate_paths(const MapfInstance& instance, const std::vector<Path>& paths) {
    const GridMap& map = instance.map();
    if (static_cast<int>(paths.size()) != instance.num_agents()) {
        throw MapError("expected one path per agent");
    }
    std::size_t horizon = 0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const Path& p = paths[i];
        if (p.empty()) throw MapError("agent " + std::to_string(i) + " has an empty path");
        if (p.front() != instance.agents()[i].start) {
            throw MapError("agent " + std::to_string(i) + " does not start at its start cell");
        }
        for (std::size_t t = 0; t < p.size(); ++t) {
            if (!map.in_bounds(p[t])) {
                throw MapError("agent " + std::to_string(i) + " leaves the map at t=" + std::to_string(t));
            }
            if (map.at(p[t]) != Tile::Empty) {
                throw MapError("agent " + std::to_string(i) + " enters an obstacle at t=" + std::to_string(t));
            }
            if (t > 0 && std::abs(p[t].row - p[t - 1].row) + std::abs(p[t].col - p[t - 1].col) > 1) {
                throw MapError("agent " + std::to_string(i) + " jumps at t=" + std::to_string(t));
            }
        }
        horizon = std::max(horizon, p.size());
    }
    auto at = [&](std::size_t i, std::size_t t) -> const Cell& {
        const Path& p = paths[i];
        return t < p.size() ? p[t] : p.back();
    };
    std::vector<Conflict> conflicts;
    for (std::size_t a = 0; a < paths.size(); ++a) {
        for (std::size_t b = a + 1; b < paths.size(); ++b) {
            for (std::size_t t = 0; t < horizon; ++t) {
                if (at(a, t) == at(b, t)) {
                    conflicts.push_back({ConflictKind::Vertex, static_cast<int>(a), static_cast<int>(b),
                                         static_cast<int>(t), at(a, t), at(a, t)});
                } else if (t > 0 && at(a, t) == at(b, t - 1) && at(a, t - 1) == at(b, t)) {
                    conflicts.push_back({ConflictKind::Edge, static_cast<int>(a), static_cast<int>(b),
                                         static_cast<int>(t), at(a, t - 1), at(b, t - 1)});
                }
            }
        }
    }
    return conflicts;
}

std::vector<Conflict> validate_solution(const MapfInstance& instance, const Solution& solution) {
    return validate_paths(instance, solution.paths);
}

}  // namespace mapgen
