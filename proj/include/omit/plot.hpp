#pragma once

// Minimal SVG line plots. Output depends only on the data (fixed-precision
// coordinates, no timestamps), so it can be pinned by golden files.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "omit/error.hpp"

namespace omit {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct Panel {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
};

namespace detail {

inline std::string escape_xml(const std::string& s) {
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

inline constexpr const char* palette[] = {"#1f4e9c", "#b22222", "#2e8b57", "#8b6914", "#6a3d9a",
                                          "#d2691e", "#008b8b", "#444444", "#c71585", "#556b2f"};

} // namespace detail

/// Panels stacked vertically, one polyline per series.
inline std::string render_svg(const std::vector<Panel>& panels) {
    if (panels.empty()) throw DomainError("plot: nothing to draw");
    for (const auto& p : panels) {
        if (p.series.empty()) throw DomainError("plot: panel '" + p.title + "' has no series");
        for (const auto& s : p.series)
            if (s.x.empty() || s.x.size() != s.y.size())
                throw DomainError("plot: series '" + s.label + "' is empty or ragged");
    }

    constexpr double width = 720, panel_h = 260, left = 80, right = 20, top = 30, bottom = 45;
    const double height = panel_h * static_cast<double>(panels.size());
    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
        "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        width, height, width, height);

    for (std::size_t k = 0; k < panels.size(); ++k) {
        const Panel& p = panels[k];
        const double y0 = panel_h * static_cast<double>(k);
        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
        for (const auto& s : p.series)
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        if (!(xmax > xmin)) { xmin -= 0.5; xmax += 0.5; }
        if (!(ymax > ymin)) { ymin -= 0.5; ymax += 0.5; }
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;

        const double pw = width - left - right, ph = panel_h - top - bottom;
        auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
        auto sy = [&](double y) { return y0 + top + (ymax - y) / (ymax - ymin) * ph; };

        svg += fmt::format("<g>\n<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
                           "fill=\"none\" stroke=\"black\"/>\n",
                           left, y0 + top, pw, ph);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2,
                           y0 + top - 10, detail::escape_xml(p.title));
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2,
                           y0 + panel_h - 8, detail::escape_xml(p.xlabel));
        svg += fmt::format("<text x=\"16\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2f})\">"
                           "{}</text>\n",
                           y0 + top + ph / 2, y0 + top + ph / 2, detail::escape_xml(p.ylabel));
        for (int t = 0; t <= 4; ++t) {
            // ticks within rounding of zero are printed as zero
            auto tick = [](double lo, double hi, int k) {
                const double v = lo + (hi - lo) * k / 4.0;
                return std::abs(v) < 1e-9 * (hi - lo) ? 0.0 : v;
            };
            const double fx = tick(xmin, xmax, t), fy = tick(ymin, ymax, t);
            svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.3g}</text>\n", sx(fx),
                               y0 + top + ph + 15, fx);
            svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 4,
                               sy(fy) + 4, fy);
        }

        for (std::size_t j = 0; j < p.series.size(); ++j) {
            const Series& s = p.series[j];
            std::string points;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                points += fmt::format("{}{:.2f},{:.2f}", points.empty() ? "" : " ", sx(s.x[i]), sy(s.y[i]));
            }
            const char* colour = detail::palette[j % std::size(detail::palette)];
            svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"{} points=\"{}\"/>\n", colour,
                               s.dashed ? " stroke-dasharray=\"4 3\"" : "", points);
            if (!s.label.empty())
                svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" fill=\"{}\">{}</text>\n",
                                   left + pw - 6, y0 + top + 14 + 14 * static_cast<double>(j), colour,
                                   detail::escape_xml(s.label));
        }
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace omit
