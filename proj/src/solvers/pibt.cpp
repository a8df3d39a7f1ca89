#include <algorithm>
#include <numeric>

#include "mapgen/solvers.hpp"

namespace mapgen {

namespace {

constexpr int kNone = -1;

class Pibt {
public:
    explicit Pibt(const MapfInstance& instance) : instance_(instance), map_(instance.map()) {
        const int n = instance.num_agents();
        for (int i = 0; i < n; ++i) dist_.push_back(bfs_distances(map_, instance.goal_index(i)).dist);
        current_.resize(static_cast<std::size_t>(n));
        next_.assign(static_cast<std::size_t>(n), kNone);
        occupied_now_.assign(static_cast<std::size_t>(map_.size()), kNone);
        occupied_next_.assign(static_cast<std::size_t>(map_.size()), kNone);
        for (int i = 0; i < n; ++i) {
            current_[static_cast<std::size_t>(i)] = instance.start_index(i);
            occupied_now_[static_cast<std::size_t>(current_[static_cast<std::size_t>(i)])] = i;
        }
        // Distinct tie-breakers in [0, 1); agent 0 starts with the highest priority.
        epsilon_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) epsilon_[static_cast<std::size_t>(i)] = static_cast<double>(n - i) / (n + 1);
        priority_ = epsilon_;
    }

    bool all_at_goal() const {
        for (int i = 0; i < instance_.num_agents(); ++i) {
            if (current_[static_cast<std::size_t>(i)] != instance_.goal_index(i)) return false;
        }
        return true;
    }

    void step() {
        const int n = instance_.num_agents();
        for (int i = 0; i < n; ++i) {
            auto& p = priority_[static_cast<std::size_t>(i)];
            p = current_[static_cast<std::size_t>(i)] == instance_.goal_index(i) ? epsilon_[static_cast<std::size_t>(i)] : p + 1.0;
        }
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return priority_[static_cast<std::size_t>(a)] > priority_[static_cast<std::size_t>(b)];
        });
        for (int a : order) {
            if (next_[static_cast<std::size_t>(a)] == kNone) plan(a, kNone);
        }
        for (int i = 0; i < n; ++i) {
            occupied_now_[static_cast<std::size_t>(current_[static_cast<std::size_t>(i)])] = kNone;
        }
        for (int i = 0; i < n; ++i) {
            const int v = next_[static_cast<std::size_t>(i)];
            current_[static_cast<std::size_t>(i)] = v;
            occupied_now_[static_cast<std::size_t>(v)] = i;
            occupied_next_[static_cast<std::size_t>(v)] = kNone;
            next_[static_cast<std::size_t>(i)] = kNone;
        }
    }

    const std::vector<int>& positions() const { return current_; }

private:
    // Priority inheritance with backtracking. Returns false if `agent` was forced to stay.
    bool plan(int agent, int parent) {
        const int here = current_[static_cast<std::size_t>(agent)];
        const auto& dist = dist_[static_cast<std::size_t>(agent)];
        std::array<int, 5> candidates{};
        std::array<int, 4> nbs{};
        const int k = map_.empty_neighbors(here, nbs);
        for (int j = 0; j < k; ++j) candidates[static_cast<std::size_t>(j)] = nbs[static_cast<std::size_t>(j)];
        candidates[static_cast<std::size_t>(k)] = here;
        std::stable_sort(candidates.begin(), candidates.begin() + k + 1, [&](int a, int b) {
            return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)];
        });

        for (int j = 0; j <= k; ++j) {
            const int v = candidates[static_cast<std::size_t>(j)];
            if (occupied_next_[static_cast<std::size_t>(v)] != kNone) continue;
            if (parent != kNone && v == current_[static_cast<std::size_t>(parent)]) continue;
            occupied_next_[static_cast<std::size_t>(v)] = agent;
            next_[static_cast<std::size_t>(agent)] = v;
            const int occupant = occupied_now_[static_cast<std::size_t>(v)];
            if (occupant != kNone && occupant != agent && next_[static_cast<std::size_t>(occupant)] == kNone) {
                if (!plan(occupant, agent)) continue;
            }
            return true;
        }
        next_[static_cast<std::size_t>(agent)] = here;
        occupied_next_[static_cast<std::size_t>(here)] = agent;
        return false;
    }

    const MapfInstance& instance_;
    const GridMap& map_;
    std::vector<std::vector<int>> dist_;
    std::vector<int> current_;
    std::vector<int> next_;
    std::vector<int> occupied_now_;
    std::vector<int> occupied_next_;
    std::vector<double> epsilon_;
    std::vector<double> priority_;
};

}  // namespace

PibtResult solve_pibt(const MapfInstance& instance, int max_makespan) {
    if (!is_valid(instance.map())) throw MapError("PIBT requires a valid map");
    const double start = thread_cpu_seconds();
    const int n = instance.num_agents();
    Pibt pibt(instance);
    std::vector<std::vector<int>> traj(static_cast<std::size_t>(n));
    auto record = [&] {
        for (int i = 0; i < n; ++i) traj[static_cast<std::size_t>(i)].push_back(pibt.positions()[static_cast<std::size_t>(i)]);
    };
    record();
    for (int t = 0; t < max_makespan && !pibt.all_at_goal(); ++t) {
        pibt.step();
        record();
    }

    PibtResult res;
    int successes = 0;
    for (int i = 0; i < n; ++i) {
        Path p = to_cells(instance.map(), traj[static_cast<std::size_t>(i)]);
        const bool ok = p.back() == instance.agents()[static_cast<std::size_t>(i)].goal;
        successes += ok ? 1 : 0;
        res.success_flags.push_back(ok);
        const long c = path_cost(p);
        res.sum_of_cost += c;
        res.makespan = std::max(res.makespan, static_cast<int>(c));
        res.trajectories.push_back(std::move(p));
    }
    res.success_rate = n == 0 ? 1.0 : static_cast<double>(successes) / n;
    res.cpu_runtime = thread_cpu_seconds() - start;
    return res;
}

}  // namespace mapgen
