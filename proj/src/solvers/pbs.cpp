#include <algorithm>
#include <memory>

#include "conflicts.hpp"
#include "mapgen/solvers.hpp"

namespace mapgen {

namespace {

using detail::PairConflict;

struct PbsNode {
    std::vector<std::shared_ptr<const IndexPath>> paths;
    // is_higher[i][j]: agent j has priority over agent i. Transitively closed.
    std::vector<std::vector<char>> is_higher;
    long cost = 0;
};

std::optional<PairConflict> earliest_conflict(const std::vector<std::shared_ptr<const IndexPath>>& paths) {
    std::optional<PairConflict> best;
    const int n = static_cast<int>(paths.size());
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            auto c = detail::first_conflict(*paths[static_cast<std::size_t>(a)], *paths[static_cast<std::size_t>(b)], a, b);
            if (c && (!best || *c < *best)) best = c;
        }
    }
    return best;
}

class PbsSearch {
public:
    PbsSearch(const MapfInstance& instance, const Deadline& deadline) : instance_(instance), deadline_(deadline) {
        const int n = instance.num_agents();
        for (int i = 0; i < n; ++i) heuristics_.push_back(bfs_distances(instance.map(), instance.goal_index(i)).dist);
    }

    // Plans `agent` optimally against every higher-priority path; lower and unrelated agents'
    // paths only break ties.
    bool replan(PbsNode& node, int agent) const {
        LowLevelQuery q;
        q.agent = agent;
        q.heuristic = &heuristics_[static_cast<std::size_t>(agent)];
        const auto& higher = node.is_higher[static_cast<std::size_t>(agent)];
        for (std::size_t j = 0; j < node.paths.size(); ++j) {
            if (static_cast<int>(j) == agent || !node.paths[j]) continue;
            (higher[j] ? q.hard_paths : q.soft_paths).push_back(node.paths[j].get());
        }
        auto res = low_level_search(instance_, q, &deadline_);
        if (!res) return false;
        node.paths[static_cast<std::size_t>(agent)] = std::make_shared<const IndexPath>(std::move(res->path));
        return true;
    }

    /// Child of `parent` in which `high` gets priority over `low`. Returns nullopt if the order
    /// is cyclic or some affected agent cannot be replanned.
    std::optional<PbsNode> branch(const PbsNode& parent, int high, int low) const {
        if (parent.is_higher[static_cast<std::size_t>(high)][static_cast<std::size_t>(low)]) return std::nullopt;
        PbsNode child = parent;
        const std::size_t n = child.paths.size();
        auto& closure = child.is_higher;
        std::vector<int> affected;
        for (std::size_t x = 0; x < n; ++x) {
            if (static_cast<int>(x) != low && !closure[x][static_cast<std::size_t>(low)]) continue;
            closure[x][static_cast<std::size_t>(high)] = 1;
            for (std::size_t j = 0; j < n; ++j) {
                if (closure[static_cast<std::size_t>(high)][j]) closure[x][j] = 1;
            }
            affected.push_back(static_cast<int>(x));
        }
        // Topological order: an agent's higher set strictly contains that of any agent above it.
        auto rank = [&](int x) {
            return std::count(closure[static_cast<std::size_t>(x)].begin(), closure[static_cast<std::size_t>(x)].end(), 1);
        };
        std::stable_sort(affected.begin(), affected.end(), [&](int a, int b) { return rank(a) < rank(b); });
        for (int x : affected) {
            if (!replan(child, x)) return std::nullopt;
        }
        child.cost = 0;
        for (const auto& p : child.paths) child.cost += static_cast<long>(p->size()) - 1;
        return child;
    }

    const MapfInstance& instance_;
    const Deadline& deadline_;
    std::vector<std::vector<int>> heuristics_;
};

}  // namespace

PbsResult solve_pbs_detailed(const MapfInstance& instance, double time_limit) {
    if (!is_valid(instance.map())) throw MapError("PBS requires a valid map");
    const Deadline deadline(time_limit);
    const int n = instance.num_agents();
    PbsSearch search(instance, deadline);

    PbsResult result;
    auto fail = [&](SolveStatus status) {
        result.solution.status = status;
        result.solution.cpu_runtime = status == SolveStatus::Timeout ? time_limit : deadline.elapsed();
        return result;
    };

    PbsNode root;
    root.paths.resize(static_cast<std::size_t>(n));
    root.is_higher.assign(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
    for (int i = 0; i < n; ++i) {
        if (!search.replan(root, i)) return fail(deadline.expired() ? SolveStatus::Timeout : SolveStatus::NoSolution);
    }
    for (const auto& p : root.paths) root.cost += static_cast<long>(p->size()) - 1;

    std::vector<PbsNode> stack;
    stack.push_back(std::move(root));
    while (!stack.empty()) {
        if (deadline.expired()) return fail(SolveStatus::Timeout);
        PbsNode node = std::move(stack.back());
        stack.pop_back();

        const auto conflict = earliest_conflict(node.paths);
        if (!conflict) {
            Solution& sol = result.solution;
            sol.status = SolveStatus::Solved;
            for (const auto& p : node.paths) {
                sol.paths.push_back(to_cells(instance.map(), *p));
                sol.makespan = std::max(sol.makespan, static_cast<int>(p->size()) - 1);
            }
            sol.sum_of_cost = node.cost;
            sol.cpu_runtime = deadline.elapsed();
            result.higher.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (node.is_higher[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
                        result.higher[static_cast<std::size_t>(i)].push_back(j);
                    }
                }
            }
            return result;
        }

        auto first = search.branch(node, conflict->agent_a, conflict->agent_b);
        if (deadline.expired()) return fail(SolveStatus::Timeout);
        auto second = search.branch(node, conflict->agent_b, conflict->agent_a);
        if (deadline.expired()) return fail(SolveStatus::Timeout);

        // Depth-first: the cheaper child is expanded next.
        if (first && second) {
            if (second->cost < first->cost) std::swap(first, second);
            stack.push_back(std::move(*second));
            stack.push_back(std::move(*first));
        } else if (first) {
            stack.push_back(std::move(*first));
        } else if (second) {
            stack.push_back(std::move(*second));
        }
    }
    return fail(SolveStatus::NoSolution);
}

Solution solve_pbs(const MapfInstance& instance, double time_limit) {
    return solve_pbs_detailed(instance, time_limit).solution;
}

}  // namespace mapgen
