#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace mapgen::qd {

struct MeasureAxis {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    int bins = 100;
};

using BinIndex = std::pair<int, int>;

struct Elite {
    std::vector<double> solution;
    double objective = 0.0;
    std::vector<double> measures;
    double threshold = 0.0;
    nlohmann::json payload;  // caller-owned extras (map rows, diagnostics), persisted verbatim
};

struct AddResult {
    enum class Status { NotAdded, Improved, New };
    Status status = Status::NotAdded;
    double improvement = 0.0;  // objective minus the cell threshold before the update
    BinIndex cell;
};

/// Two-axis grid archive with CMA-MAE acceptance thresholds. Maximizes the objective.
class Archive {
public:
    Archive(std::array<MeasureAxis, 2> axes, double alpha, double min_f);

    /// Values are clamped into [lower, upper]; the upper bound lands in the last bin.
    BinIndex bin_index(const std::vector<double>& measures) const;

    /// Candidate enters the cell if objective > threshold; it replaces the elite only if it also
    /// beats the stored objective. The threshold then moves to (1-alpha)*t + alpha*objective.
    AddResult add(std::vector<double> solution, double objective, std::vector<double> measures,
                  nlohmann::json payload = {});

    /// Threshold of `cell`, or min_f for a cell that was never entered.
    double threshold(BinIndex cell) const;
    /// Sum over occupied cells of (objective - min_f).
    double qd_score() const;
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }
    const std::map<BinIndex, Elite>& cells() const { return cells_; }
    const std::array<MeasureAxis, 2>& axes() const { return axes_; }
    double alpha() const { return alpha_; }
    double min_f() const { return min_f_; }

    /// Uniformly chosen elite in row-major cell order.
    const Elite& sample_elite(std::mt19937_64& rng) const;
    /// Restores a persisted cell verbatim.
    void restore(BinIndex cell, Elite elite);

private:
    std::array<MeasureAxis, 2> axes_;
    double alpha_;
    double min_f_;
    std::map<BinIndex, Elite> cells_;
};

}  // namespace mapgen::qd
