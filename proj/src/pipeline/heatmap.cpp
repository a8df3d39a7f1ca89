#include "mapgen/pipeline/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace mapgen::pipeline {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double plot_value(const qd::Elite& e) { return e.payload.value("plot_value", e.objective); }
int no_solution(const qd::Elite& e) { return e.payload.value("no_solution_count", 0) > 0 ? 1 : 0; }

void require_cells(const qd::Archive& archive) {
    if (archive.empty()) throw std::invalid_argument("cannot render an empty archive");
}

// Viridis-like ramp from dark purple (t = 0) to yellow (t = 1).
std::string ramp(double t) {
    static constexpr double stops[5][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int k = std::min(static_cast<int>(t), 3);
    const double f = t - k;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[k][0] + f * (stops[k + 1][0] - stops[k][0])),
                  static_cast<int>(stops[k][1] + f * (stops[k + 1][1] - stops[k][1])),
                  static_cast<int>(stops[k][2] + f * (stops[k + 1][2] - stops[k][2])));
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string value_label(const ExperimentConfig& config) {
    switch (config.objective) {
        case ObjectiveKind::Runtime: return "mean CPU runtime (s)";
        case ObjectiveKind::NegRsr: return "mean success rate";
        case ObjectiveKind::Similarity: return "similarity";
        case ObjectiveKind::RuntimeGap: return "runtime difference (s)";
        case ObjectiveKind::RsrGap: return "RSR difference";
    }
    return "value";
}

}  // namespace

std::string heatmap_csv(const qd::Archive& archive) {
    require_cells(archive);
    std::string out = "bin_x,bin_y,measure_x,measure_y,objective,value,no_solution\n";
    for (const auto& [bin, e] : archive.cells()) {
        out += std::to_string(bin.first) + "," + std::to_string(bin.second) + "," + fmt(e.measures[0]) + "," +
               fmt(e.measures[1]) + "," + fmt(e.objective) + "," + fmt(plot_value(e)) + "," + std::to_string(no_solution(e)) + "\n";
    }
    return out;
}

std::string heatmap_svg(const qd::Archive& archive, const ExperimentConfig& config) {
    require_cells(archive);
    const auto& ax = archive.axes();
    constexpr double plot = 400.0, left = 70.0, top = 40.0, bar = 16.0;
    const double cw = plot / ax[0].bins, ch = plot / ax[1].bins;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [bin, e] : archive.cells()) {
        lo = std::min(lo, plot_value(e));
        hi = std::max(hi, plot_value(e));
    }
    const double span = hi > lo ? hi - lo : 1.0;
    const double width = left + plot + 110.0, height = top + plot + 60.0;

    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<text x=\"" + fmt(left) + "\" y=\"20\">" + escape(config.name + ": " + value_label(config)) + "</text>\n";
    s += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(plot) + "\" height=\"" + fmt(plot) +
         "\" fill=\"#ffffff\" stroke=\"#000000\"/>\n";
    for (const auto& [bin, e] : archive.cells()) {
        // Bin y grows upward.
        const double x = left + bin.first * cw;
        const double y = top + plot - (bin.second + 1) * ch;
        s += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(cw) + "\" height=\"" + fmt(ch) + "\" fill=\"" +
             ramp((plot_value(e) - lo) / span) + "\"";
        if (no_solution(e)) s += " stroke=\"#ff8c00\" stroke-width=\"1.5\"";
        s += "/>\n";
    }
    const double bottom = top + plot;
    s += "<text x=\"" + fmt(left) + "\" y=\"" + fmt(bottom + 16) + "\">" + fmt(ax[0].lower) + "</text>\n";
    s += "<text x=\"" + fmt(left + plot) + "\" y=\"" + fmt(bottom + 16) + "\" text-anchor=\"end\">" + fmt(ax[0].upper) + "</text>\n";
    s += "<text x=\"" + fmt(left + plot / 2) + "\" y=\"" + fmt(bottom + 36) + "\" text-anchor=\"middle\">" + escape(ax[0].name) + "</text>\n";
    s += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(bottom) + "\" text-anchor=\"end\">" + fmt(ax[1].lower) + "</text>\n";
    s += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(top + 10) + "\" text-anchor=\"end\">" + fmt(ax[1].upper) + "</text>\n";
    s += "<text transform=\"translate(" + fmt(left - 40) + "," + fmt(top + plot / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(ax[1].name) + "</text>\n";
    const double bx = left + plot + 20;
    for (int k = 0; k < 20; ++k) {
        s += "<rect x=\"" + fmt(bx) + "\" y=\"" + fmt(top + plot - (k + 1) * plot / 20) + "\" width=\"" + fmt(bar) + "\" height=\"" +
             fmt(plot / 20) + "\" fill=\"" + ramp((k + 0.5) / 20) + "\"/>\n";
    }
    s += "<text x=\"" + fmt(bx + bar + 4) + "\" y=\"" + fmt(bottom) + "\">" + fmt(lo) + "</text>\n";
    s += "<text x=\"" + fmt(bx + bar + 4) + "\" y=\"" + fmt(top + 10) + "\">" + fmt(hi) + "</text>\n";
    s += "</svg>\n";
    return s;
}

}  // namespace mapgen::pipeline
