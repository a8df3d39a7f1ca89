#include "mapgen/qd/archive.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

#include "mapgen/rng.hpp"

namespace mapgen::qd {

Archive::Archive(std::array<MeasureAxis, 2> axes, double alpha, double min_f)
    : axes_(std::move(axes)), alpha_(alpha), min_f_(min_f) {
    for (const auto& a : axes_) {
        if (a.bins < 1) throw std::invalid_argument("axis '" + a.name + "' needs at least one bin");
        if (!(a.upper > a.lower)) throw std::invalid_argument("axis '" + a.name + "' has an empty range");
    }
    if (alpha_ < 0.0 || alpha_ > 1.0) throw std::invalid_argument("archive learning rate must be in [0, 1]");
}

BinIndex Archive::bin_index(const std::vector<double>& measures) const {
    if (measures.size() != 2) throw std::invalid_argument("archive expects two measures");
    std::array<int, 2> idx{};
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& a = axes_[k];
        const double v = std::clamp(measures[k], a.lower, a.upper);
        const int b = static_cast<int>(std::floor((v - a.lower) / (a.upper - a.lower) * a.bins));
        idx[k] = std::min(b, a.bins - 1);
    }
    return {idx[0], idx[1]};
}

AddResult Archive::add(std::vector<double> solution, double objective, std::vector<double> measures,
                       nlohmann::json payload) {
    AddResult res;
    res.cell = bin_index(measures);
    auto it = cells_.find(res.cell);
    const double t = it == cells_.end() ? min_f_ : it->second.threshold;
    res.improvement = objective - t;
    if (!(objective > t)) return res;

    const double next_t = (1.0 - alpha_) * t + alpha_ * objective;
    if (it == cells_.end()) {
        cells_.emplace(res.cell, Elite{std::move(solution), objective, std::move(measures), next_t, std::move(payload)});
        res.status = AddResult::Status::New;
        return res;
    }
    Elite& e = it->second;
    e.threshold = next_t;
    if (objective > e.objective) {
        e.solution = std::move(solution);
        e.objective = objective;
        e.measures = std::move(measures);
        e.payload = std::move(payload);
        res.status = AddResult::Status::Improved;
    }
    return res;
}

double Archive::threshold(BinIndex cell) const {
    const auto it = cells_.find(cell);
    return it == cells_.end() ? min_f_ : it->second.threshold;
}

double Archive::qd_score() const {
    double s = 0.0;
    for (const auto& [cell, e] : cells_) s += e.objective - min_f_;
    return s;
}

const Elite& Archive::sample_elite(std::mt19937_64& rng) const {
    if (cells_.empty()) throw std::logic_error("cannot sample from an empty archive");
    auto it = cells_.begin();
    std::advance(it, static_cast<long>(uniform_below(rng, cells_.size())));
    return it->second;
}

void Archive::restore(BinIndex cell, Elite elite) { cells_[cell] = std::move(elite); }

}  // namespace mapgen::qd
