#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mapgen/instance.hpp"

namespace mapgen {

/// One cell per timestep; index 0 is the start. Consecutive cells are equal (wait) or 4-adjacent.
using Path = std::vector<Cell>;

enum class SolveStatus { Solved, Timeout, NoSolution };

std::string to_string(SolveStatus status);

struct Solution {
    std::vector<Path> paths;
    long sum_of_cost = 0;
    int makespan = 0;
    double cpu_runtime = 0.0;
    SolveStatus status = SolveStatus::Timeout;
};

struct PibtResult {
    std::vector<Path> trajectories;  // all the same length, at most max_makespan + 1
    std::vector<bool> success_flags;
    double success_rate = 0.0;
    long sum_of_cost = 0;  // meaningful when every agent succeeded
    int makespan = 0;
    double cpu_runtime = 0.0;
};

enum class ConflictKind { Vertex, Edge };

struct Conflict {
    ConflictKind kind = ConflictKind::Vertex;
    int agent_a = 0;
    int agent_b = 0;
    int timestep = 0;
    Cell cell_a;  // Vertex: the shared cell. Edge: agent_a's cell at timestep-1.
    Cell cell_b;  // Edge only: agent_b's cell at timestep-1.

    friend bool operator==(const Conflict&, const Conflict&) = default;
};

/// Cost of a path: the last timestep at which the agent moves. Trailing waits are free.
long path_cost(const Path& path);

/// Exhaustive vertex and edge conflicts after padding shorter paths with waits at their last cell.
/// Throws MapError if a path leaves the map, enters an obstacle, jumps, or does not start at the
/// agent's start.
std::vector<Conflict> validate_paths(const MapfInstance& instance, const std::vector<Path>& paths);
std::vector<Conflict> validate_solution(const MapfInstance& instance, const Solution& solution);

// ---------------------------------------------------------------------------------------------
// Single-agent space-time search.

/// Paths in tile-index form, used internally by the solvers.
using IndexPath = std::vector<int>;

Path to_cells(const GridMap& map, const IndexPath& path);

struct Constraint {
    /// Range forbids `location` during [timestep, until]; Length forbids finishing (resting at
    /// the goal for good) before `timestep`.
    enum class Kind { Vertex, Edge, Range, Length };
    static constexpr int kForever = std::numeric_limits<int>::max();

    Kind kind = Kind::Vertex;
    int agent = 0;
    int location = 0;     // Vertex/Range: forbidden tile. Edge: tile the move leaves.
    int to_location = 0;  // Edge: tile the move enters.
    int timestep = 0;     // time at which the agent would occupy `location` (Vertex) or `to_location` (Edge)
    int until = 0;        // Range only, inclusive; kForever for an open-ended range
};

/// Thread-CPU deadline shared by a solver call and its low-level searches.
class Deadline {
public:
    explicit Deadline(double seconds);
    bool expired() const;
    double elapsed() const;

private:
    double start_;
    double limit_;
};

double thread_cpu_seconds();

struct LowLevelQuery {
    int agent = 0;
    std::vector<Constraint> constraints;            // entries for other agents are ignored
    std::vector<const IndexPath*> hard_paths;       // higher-priority paths to avoid entirely
    std::vector<const IndexPath*> soft_paths;       // other agents' paths, counted for tie-breaking
    double focal_w = 1.0;
    const std::vector<int>* heuristic = nullptr;    // BFS distance-to-goal field; computed if null
};

struct LowLevelPath {
    IndexPath path;
    int cost = 0;
    int lower_bound = 0;  // f_min of the search frontier when the path was returned
    int conflicts = 0;    // conflicts with the soft paths
};

/// Space-time A* (focal_w == 1) or focal search (focal_w > 1). With focal_w > 1 the returned
/// path has cost <= focal_w * lower_bound, and among admissible frontier nodes the one with the
/// fewest soft conflicts is expanded first. The horizon is 2 * width * height timesteps.
std::optional<LowLevelPath> low_level_search(const MapfInstance& instance, const LowLevelQuery& query,
                                             const Deadline* deadline = nullptr);

/// Multi-valued decision diagram: every path of exactly `cost` timesteps that satisfies the
/// query's constraints (hard and soft paths are ignored) and then rests at the goal for good.
struct Mdd {
    std::vector<std::vector<int>> levels;                 // sorted tiles per timestep 0..cost
    std::vector<std::vector<std::vector<int>>> children;  // children[t][i]: indices into levels[t + 1]

    bool empty() const { return levels.empty(); }
    int cost() const { return static_cast<int>(levels.size()) - 1; }
};

/// Empty if no such path exists.
Mdd build_mdd(const MapfInstance& instance, const LowLevelQuery& query, int cost);

enum class Compatibility { Yes, No, Unknown };

/// Whether some path of `a` and some path of `b` avoid each other (vertex and swap conflicts,
/// including a rest at the goal after either diagram ends). Every visited pair of nodes costs
/// one unit of `budget`; Unknown once it runs out.
Compatibility mdd_compatible(const Mdd& a, const Mdd& b, long& budget);

struct JointPlan {
    bool found = false;
    bool gave_up = false;  // expansion budget or deadline reached before an answer
    long cost = 0;
    std::vector<IndexPath> paths;  // one per query, each ending where the agent comes to rest
};

/// Optimal combined plan of up to 4 agents that respect their own constraints and avoid each
/// other, by A* over joint states (resting at the goal for good is free). Soft and hard paths
/// in the queries are ignored.
JointPlan joint_search(const MapfInstance& instance, const std::vector<LowLevelQuery>& queries, long max_expansions,
                       const Deadline* deadline = nullptr);

// ---------------------------------------------------------------------------------------------
// Multi-agent solvers.

/// EECBS with suboptimality factor w >= 1; w == 1 is plain optimal CBS. An exhausted search
/// (possible only because of the low-level horizon) is reported as Timeout, like a CBS run
/// that never terminates on an infeasible instance.
Solution solve_cbs(const MapfInstance& instance, double w, double time_limit);

struct PbsResult {
    Solution solution;
    /// higher[i] lists every agent with priority over agent i (transitively closed).
    std::vector<std::vector<int>> higher;
};

Solution solve_pbs(const MapfInstance& instance, double time_limit);
PbsResult solve_pbs_detailed(const MapfInstance& instance, double time_limit);

PibtResult solve_pibt(const MapfInstance& instance, int max_makespan);

/// Exact optimal sum-of-cost by uniform-cost search over joint configurations. Requires at most
/// 3 agents and 36 Empty tiles. Returns nullopt when no solution of cost <= cost_bound exists.
std::optional<long> joint_state_oracle(const MapfInstance& instance, long cost_bound = 1L << 40);

}  // namespace mapgen
