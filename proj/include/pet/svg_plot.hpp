#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "pet/error.hpp"
#include "pet/gaze_metrics.hpp"

namespace pet {

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace detail

/// Self-contained SVG of a difference curve: shaded bootstrap envelope
/// (one polygon), median polyline, zero-reference polyline, labeled axes.
inline std::string render_difference_curve_svg(const DifferenceCurve& curve,
                                               const std::string& title = "") {
    const size_t n = curve.percentiles.size();
    require(n >= 1, Errc::empty_input, "empty curve");
    require(curve.median_diff.size() == n && curve.envelope_low.size() == n &&
                curve.envelope_high.size() == n,
            Errc::dimension_mismatch, "curve arrays differ in length");
    for (size_t i = 0; i < n; ++i)
        require(curve.envelope_low[i] <= curve.envelope_high[i], Errc::invalid_argument,
                "envelope_low above envelope_high");

    const double width = 640.0, height = 420.0;
    const double ml = 64.0, mr = 18.0, mt = 34.0, mb = 48.0;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double x_min = curve.percentiles.front(), x_max = curve.percentiles.back();
    if (x_max <= x_min) x_max = x_min + 1.0;
    double y_min = 0.0, y_max = 0.0;
    for (size_t i = 0; i < n; ++i) {
        y_min = std::min({y_min, curve.envelope_low[i], curve.median_diff[i]});
        y_max = std::max({y_max, curve.envelope_high[i], curve.median_diff[i]});
    }
    double pad = 0.08 * std::max(1e-9, y_max - y_min);
    y_min -= pad;
    y_max += pad;

    auto px = [&](double p) { return ml + (p - x_min) / (x_max - x_min) * pw; };
    auto py = [&](double v) { return mt + (y_max - v) / (y_max - y_min) * ph; };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) +
           "\" height=\"" + detail::svg_num(height) + "\" viewBox=\"0 0 " + detail::svg_num(width) +
           " " + detail::svg_num(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // envelope polygon: high curve forward, low curve backward
    svg += "<polygon fill=\"#9ecae9\" fill-opacity=\"0.55\" stroke=\"none\" points=\"";
    for (size_t i = 0; i < n; ++i)
        svg += detail::svg_num(px(curve.percentiles[i])) + "," +
               detail::svg_num(py(curve.envelope_high[i])) + " ";
    for (size_t i = n; i-- > 0;)
        svg += detail::svg_num(px(curve.percentiles[i])) + "," +
               detail::svg_num(py(curve.envelope_low[i])) + " ";
    svg += "\"/>\n";

    // zero-reference line
    svg += "<polyline fill=\"none\" stroke=\"#888888\" stroke-dasharray=\"5,4\" points=\"" +
           detail::svg_num(px(x_min)) + "," + detail::svg_num(py(0.0)) + " " +
           detail::svg_num(px(x_max)) + "," + detail::svg_num(py(0.0)) + "\"/>\n";

    // median trace
    svg += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < n; ++i)
        svg += detail::svg_num(px(curve.percentiles[i])) + "," +
               detail::svg_num(py(curve.median_diff[i])) + " ";
    svg += "\"/>\n";

    // axes
    svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt + ph) +
           "\" x2=\"" + detail::svg_num(ml + pw) + "\" y2=\"" + detail::svg_num(mt + ph) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt) + "\" x2=\"" +
           detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(mt + ph) + "\" stroke=\"black\"/>\n";

    // x ticks at the curve's percentiles (at most ~10 labels)
    size_t step = std::max<size_t>(1, n / 10);
    for (size_t i = 0; i < n; i += step) {
        double x = px(curve.percentiles[i]);
        svg += "<line x1=\"" + detail::svg_num(x) + "\" y1=\"" + detail::svg_num(mt + ph) +
               "\" x2=\"" + detail::svg_num(x) + "\" y2=\"" + detail::svg_num(mt + ph + 5) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::svg_num(x) + "\" y=\"" + detail::svg_num(mt + ph + 18) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + detail::svg_num(curve.percentiles[i]) +
               "</text>\n";
    }
    // y ticks: min, zero, max
    for (double v : {y_min + pad, 0.0, y_max - pad}) {
        double y = py(v);
        svg += "<line x1=\"" + detail::svg_num(ml - 5) + "\" y1=\"" + detail::svg_num(y) +
               "\" x2=\"" + detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(y) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::svg_num(ml - 8) + "\" y=\"" + detail::svg_num(y + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + detail::svg_num(v) + "</text>\n";
    }

    svg += "<text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"" +
           detail::svg_num(height - 10) +
           "\" font-size=\"13\" text-anchor=\"middle\">error percentile</text>\n";
    svg += "<text x=\"16\" y=\"" + detail::svg_num(mt + ph / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           detail::svg_num(mt + ph / 2) + ")\">median difference (deg)</text>\n";
    if (!title.empty())
        svg += "<text x=\"" + detail::svg_num(ml + pw / 2) +
               "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">" + title + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

inline void emit_plot(const DifferenceCurve& curve, const std::filesystem::path& path,
                      const std::string& title = "") {
    std::string svg = render_difference_curve_svg(curve, title);
    std::ofstream out(path, std::ios::binary);
    require(out.good(), Errc::io_failure, "cannot open " + path.string() + " for writing");
    out << svg;
    require(out.good(), Errc::io_failure, "write failed: " + path.string());
}

}  // namespace pet
