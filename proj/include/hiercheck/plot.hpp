#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hiercheck/pivotal.hpp"

namespace hiercheck {

enum class PlotKind { QQ, Histogram };

/**
 * @brief A static plot: QQ points, or raw values binned into a histogram.
 *
 * Histograms bin `values` into `bins` equal-width bins over [range_lo, range_hi];
 * the last bin is closed on the right.
 */
struct PlotDocument {
    PlotKind kind = PlotKind::QQ;
    std::vector<QQPoint> points;
    std::vector<double> values;
    std::size_t bins = 20;
    double range_lo = 0.0;
    double range_hi = 1.0;
    std::string title;
    std::string x_label;
    std::string y_label;
    /// Draws y = x across the visible range.
    bool identity_line = false;

    void validate() const;
};

[[nodiscard]] PlotDocument qq_document(std::vector<QQPoint> points, std::string title, std::string x_label = "theoretical",
                                       std::string y_label = "empirical");
[[nodiscard]] PlotDocument histogram_document(std::vector<double> values, std::string title, std::size_t bins = 20);

[[nodiscard]] std::vector<std::size_t> histogram_counts(std::span<const double> values, std::size_t bins, double lo,
                                                        double hi);

/// SVG 1.1 text; identical documents give identical bytes.
[[nodiscard]] std::string render_svg(const PlotDocument& doc);
void render_plot(const PlotDocument& doc, const std::filesystem::path& path);

}  // namespace hiercheck
