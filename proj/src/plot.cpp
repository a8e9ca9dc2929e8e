#include "hiercheck/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "hiercheck/errors.hpp"

namespace hiercheck {

namespace {

constexpr double kWidth = 480.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 20.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 52.0;

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

struct Axis {
    double lo;
    double hi;
    double pixel_lo;
    double pixel_hi;
    [[nodiscard]] double map(double v) const { return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo); }
};

Axis padded(double lo, double hi, double pixel_lo, double pixel_hi) {
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.04 * (hi - lo);
    return {lo - pad, hi + pad, pixel_lo, pixel_hi};
}

void axes(std::string& svg, const Axis& x, const Axis& y, const PlotDocument& doc) {
    const double x0 = kLeft;
    const double x1 = kWidth - kRight;
    const double y0 = kHeight - kBottom;
    const double y1 = kTop;
    svg += fmt::format(R"(<rect x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="none" stroke="#000"/>)"
                       "\n",
                       x0, y1, x1 - x0, y0 - y1);
    for (int i = 0; i <= 4; ++i) {
        const double xv = x.lo + (x.hi - x.lo) * i / 4.0;
        const double px = x.map(xv);
        svg += fmt::format(R"(<line x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="#000"/>)"
                           "\n",
                           px, y0, px, y0 + 5);
        svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="11" text-anchor="middle">{:.3g}</text>)"
                           "\n",
                           px, y0 + 18, xv);
        const double yv = y.lo + (y.hi - y.lo) * i / 4.0;
        const double py = y.map(yv);
        svg += fmt::format(R"(<line x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="#000"/>)"
                           "\n",
                           x0 - 5, py, x0, py);
        svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="11" text-anchor="end">{:.3g}</text>)"
                           "\n",
                           x0 - 8, py + 4, yv);
    }
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="14" text-anchor="middle">{}</text>)"
                       "\n",
                       kWidth / 2, kTop - 14, escape(doc.title));
    svg += fmt::format(R"(<text x="{:.2f}" y="{:.2f}" font-size="12" text-anchor="middle">{}</text>)"
                       "\n",
                       (x0 + x1) / 2, kHeight - 12, escape(doc.x_label));
    svg += fmt::format(
        R"svg(<text x="16" y="{:.2f}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2f})">{}</text>)svg"
        "\n",
        (y0 + y1) / 2, (y0 + y1) / 2, escape(doc.y_label));
}

}  // namespace

void PlotDocument::validate() const {
    if (kind == PlotKind::QQ) {
        if (points.empty()) throw ValidationError("plot: no data points");
        for (const auto& p : points) {
            if (!std::isfinite(p.theoretical) || !std::isfinite(p.empirical)) {
                throw ValidationError("plot: non-finite coordinate");
            }
        }
        return;
    }
    if (values.empty()) throw ValidationError("plot: no data values");
    if (bins == 0) throw ValidationError("plot: histogram needs at least one bin");
    if (!(range_hi > range_lo) || !std::isfinite(range_lo) || !std::isfinite(range_hi)) {
        throw ValidationError("plot: histogram range must be finite and increasing");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("plot: non-finite value");
    }
}

PlotDocument qq_document(std::vector<QQPoint> points, std::string title, std::string x_label, std::string y_label) {
    PlotDocument d;
    d.kind = PlotKind::QQ;
    d.points = std::move(points);
    d.title = std::move(title);
    d.x_label = std::move(x_label);
    d.y_label = std::move(y_label);
    d.identity_line = true;
    return d;
}

PlotDocument histogram_document(std::vector<double> values, std::string title, std::size_t bins) {
    PlotDocument d;
    d.kind = PlotKind::Histogram;
    d.values = std::move(values);
    d.bins = bins;
    d.title = std::move(title);
    d.x_label = "p-value";
    d.y_label = "count";
    return d;
}

std::vector<std::size_t> histogram_counts(std::span<const double> values, std::size_t bins, double lo, double hi) {
    if (bins == 0 || !(hi > lo)) throw ValidationError("histogram: bad bins or range");
    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) {
        if (!(v >= lo && v <= hi)) continue;
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        counts[std::min(b, bins - 1)]++;
    }
    return counts;
}

std::string render_svg(const PlotDocument& doc) {
    doc.validate();
    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.0f}" height="{:.0f}" )"
                       R"(viewBox="0 0 {:.0f} {:.0f}">)"
                       "\n",
                       kWidth, kHeight, kWidth, kHeight);
    svg += R"(<rect width="100%" height="100%" fill="#fff"/>)"
           "\n";
    const double px_lo = kLeft;
    const double px_hi = kWidth - kRight;
    const double py_lo = kHeight - kBottom;
    const double py_hi = kTop;

    if (doc.kind == PlotKind::QQ) {
        auto [xmin, xmax] = std::minmax_element(doc.points.begin(), doc.points.end(),
                                                [](const QQPoint& a, const QQPoint& b) {
                                                    return a.theoretical < b.theoretical;
                                                });
        auto [ymin, ymax] = std::minmax_element(doc.points.begin(), doc.points.end(),
                                                [](const QQPoint& a, const QQPoint& b) {
                                                    return a.empirical < b.empirical;
                                                });
        const Axis x = padded(xmin->theoretical, xmax->theoretical, px_lo, px_hi);
        const Axis y = padded(ymin->empirical, ymax->empirical, py_lo, py_hi);
        axes(svg, x, y, doc);
        if (doc.identity_line) {
            const double a = std::max(x.lo, y.lo);
            const double b = std::min(x.hi, y.hi);
            if (b > a) {
                svg += fmt::format(R"(<line class="identity" x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="#c00" )"
                                   R"(stroke-dasharray="4 3"/>)"
                                   "\n",
                                   x.map(a), y.map(a), x.map(b), y.map(b));
            }
        }
        for (const auto& p : doc.points) {
            svg += fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="2.5" fill="#1f4e9c"/>)"
                               "\n",
                               x.map(p.theoretical), y.map(p.empirical));
        }
    } else {
        const auto counts = histogram_counts(doc.values, doc.bins, doc.range_lo, doc.range_hi);
        const double top = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
        const Axis x{doc.range_lo, doc.range_hi, px_lo, px_hi};
        const Axis y{0.0, top > 0 ? top * 1.05 : 1.0, py_lo, py_hi};
        axes(svg, x, y, doc);
        const double width = (doc.range_hi - doc.range_lo) / static_cast<double>(doc.bins);
        for (std::size_t b = 0; b < counts.size(); ++b) {
            const double left = x.map(doc.range_lo + width * static_cast<double>(b));
            const double right = x.map(doc.range_lo + width * static_cast<double>(b + 1));
            const double height = y.map(0.0) - y.map(static_cast<double>(counts[b]));
            svg += fmt::format(R"(<rect x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="#9db8e0" )"
                               R"(stroke="#1f4e9c"/>)"
                               "\n",
                               left, y.map(static_cast<double>(counts[b])), right - left, height);
        }
    }
    svg += "</svg>\n";
    return svg;
}

void render_plot(const PlotDocument& doc, const std::filesystem::path& path) {
    const std::string svg = render_svg(doc);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << svg;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace hiercheck
