#include "defpred/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "defpred/errors.hpp"
#include "defpred/numerics.hpp"

namespace defpred::diagnostics {

namespace {

// Shortest round-trip decimal form, for lossless and byte-stable CSV.
std::string format_value(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Fixed two-decimal form for SVG coordinates: stable bytes, sub-pixel noise
// irrelevant at plot scale.
std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::size_t sturges_bins(std::size_t n) {
    return static_cast<std::size_t>(
               std::ceil(std::log2(static_cast<double>(n)))) + 1;
}

} // namespace

ResidualDiagnostics compute_diagnostics(const regress::FittedModel& m) {
    if (m.residuals.empty() || m.fitted.empty()) {
        throw DataError("model carries no residual/fitted vectors "
                        "(recompute them against the training data)");
    }
    const std::size_t n = m.residuals.size();
    if (m.fitted.size() != n) {
        throw DataError("fitted/residual vector length mismatch");
    }
    if (n < 2) throw NumericError("diagnostics require at least 2 residuals");

    ResidualDiagnostics diag;
    diag.points_vs_fitted.reserve(n);
    diag.vs_order.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag.points_vs_fitted.emplace_back(m.fitted[i], m.residuals[i]);
        diag.vs_order.emplace_back(i + 1, m.residuals[i]);
    }

    // Normal probability plot: ordered residuals against the standard normal
    // quantiles of the Blom plotting positions (i - 0.375)/(n + 0.25).
    std::vector<double> sorted = m.residuals;
    std::sort(sorted.begin(), sorted.end());
    diag.normal_plot.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pos = (static_cast<double>(i + 1) - 0.375) /
                           (static_cast<double>(n) + 0.25);
        diag.normal_plot.emplace_back(numerics::normal_quantile(pos), sorted[i]);
    }

    // Histogram: Sturges bin count over [min, max], right-open bins with the
    // last bin closed; a zero-range sample collapses to one degenerate bin.
    const double lo = sorted.front();
    const double hi = sorted.back();
    if (hi == lo) {
        diag.histogram.edges = {lo, hi};
        diag.histogram.counts = {n};
    } else {
        const std::size_t k = sturges_bins(n);
        diag.histogram.edges.resize(k + 1);
        for (std::size_t i = 0; i <= k; ++i) {
            diag.histogram.edges[i] =
                lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(k));
        }
        diag.histogram.edges[k] = hi;
        diag.histogram.counts.assign(k, 0);
        for (double r : m.residuals) {
            auto idx = static_cast<std::size_t>((r - lo) / (hi - lo) *
                                                static_cast<double>(k));
            if (idx >= k) idx = k - 1; // the maximum falls in the last bin
            ++diag.histogram.counts[idx];
        }
    }
    return diag;
}

namespace {

std::string render_vs_fitted_csv(const ResidualDiagnostics& d) {
    std::string out = "fitted,residual\n";
    for (const auto& [f, r] : d.points_vs_fitted) {
        out += format_value(f) + "," + format_value(r) + "\n";
    }
    return out;
}

std::string render_normal_plot_csv(const ResidualDiagnostics& d) {
    std::string out = "theoretical_quantile,residual\n";
    for (const auto& [q, r] : d.normal_plot) {
        out += format_value(q) + "," + format_value(r) + "\n";
    }
    return out;
}

std::string render_histogram_csv(const ResidualDiagnostics& d) {
    std::string out = "bin_low,bin_high,count\n";
    for (std::size_t i = 0; i < d.histogram.counts.size(); ++i) {
        out += format_value(d.histogram.edges[i]) + "," +
               format_value(d.histogram.edges[i + 1]) + "," +
               std::to_string(d.histogram.counts[i]) + "\n";
    }
    return out;
}

std::string render_vs_order_csv(const ResidualDiagnostics& d) {
    std::string out = "order,residual\n";
    for (const auto& [i, r] : d.vs_order) {
        out += std::to_string(i) + "," + format_value(r) + "\n";
    }
    return out;
}

// --- SVG rendering -----------------------------------------------------------

struct PanelFrame {
    double x0, y0, w, h; // drawable area in canvas coordinates
    double xmin, xmax, ymin, ymax;

    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
    double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void pad_range(double& lo, double& hi) {
    if (hi == lo) {
        lo -= 1.0;
        hi += 1.0;
        return;
    }
    const double pad = 0.06 * (hi - lo);
    lo -= pad;
    hi += pad;
}

void append_panel_box(std::string& svg, const PanelFrame& f, const std::string& title) {
    svg += "<rect x=\"" + coord(f.x0) + "\" y=\"" + coord(f.y0) + "\" width=\"" +
           coord(f.w) + "\" height=\"" + coord(f.h) +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + coord(f.x0 + f.w / 2) + "\" y=\"" + coord(f.y0 - 8) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" +
           title + "</text>\n";
}

void append_zero_line(std::string& svg, const PanelFrame& f) {
    if (f.ymin < 0.0 && f.ymax > 0.0) {
        svg += "<line x1=\"" + coord(f.x0) + "\" y1=\"" + coord(f.py(0)) +
               "\" x2=\"" + coord(f.x0 + f.w) + "\" y2=\"" + coord(f.py(0)) +
               "\" stroke=\"gray\" stroke-width=\"0.7\" stroke-dasharray=\"4 3\"/>\n";
    }
}

void append_points(std::string& svg, const PanelFrame& f,
                   const std::vector<std::pair<double, double>>& pts) {
    for (const auto& [x, y] : pts) {
        svg += "<circle cx=\"" + coord(f.px(x)) + "\" cy=\"" + coord(f.py(y)) +
               "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
}

std::string render_svg(const ResidualDiagnostics& d) {
    constexpr double width = 720, height = 560;
    constexpr double panel_w = 300, panel_h = 200;
    const double x_left = 50, x_right = 400, y_top = 40, y_bottom = 320;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(width) +
           "\" height=\"" + coord(height) + "\" viewBox=\"0 0 " + coord(width) +
           " " + coord(height) + "\">\n";
    svg += "<rect width=\"" + coord(width) + "\" height=\"" + coord(height) +
           "\" fill=\"white\"/>\n";
    svg += "<text x=\"" + coord(width / 2) +
           "\" y=\"20\" font-family=\"sans-serif\" font-size=\"15\" "
           "text-anchor=\"middle\">Residual Plots</text>\n";

    // Panel 1 (top-left): normal probability plot.
    {
        PanelFrame f{x_left, y_top, panel_w, panel_h, 0, 0, 0, 0};
        f.xmin = d.normal_plot.front().first;
        f.xmax = d.normal_plot.back().first;
        f.ymin = f.ymax = d.normal_plot.front().second;
        for (const auto& [q, r] : d.normal_plot) {
            f.ymin = std::min(f.ymin, r);
            f.ymax = std::max(f.ymax, r);
        }
        pad_range(f.xmin, f.xmax);
        pad_range(f.ymin, f.ymax);
        append_panel_box(svg, f, "Normal Probability Plot");
        append_zero_line(svg, f);
        append_points(svg, f, d.normal_plot);
    }
    // Panel 2 (top-right): residuals versus fitted values.
    {
        PanelFrame f{x_right, y_top, panel_w, panel_h, 0, 0, 0, 0};
        f.xmin = f.xmax = d.points_vs_fitted.front().first;
        f.ymin = f.ymax = d.points_vs_fitted.front().second;
        for (const auto& [x, y] : d.points_vs_fitted) {
            f.xmin = std::min(f.xmin, x);
            f.xmax = std::max(f.xmax, x);
            f.ymin = std::min(f.ymin, y);
            f.ymax = std::max(f.ymax, y);
        }
        pad_range(f.xmin, f.xmax);
        pad_range(f.ymin, f.ymax);
        append_panel_box(svg, f, "Versus Fits");
        append_zero_line(svg, f);
        append_points(svg, f, d.points_vs_fitted);
    }
    // Panel 3 (bottom-left): residual histogram.
    {
        PanelFrame f{x_left, y_bottom, panel_w, panel_h, 0, 0, 0, 0};
        f.xmin = d.histogram.edges.front();
        f.xmax = d.histogram.edges.back();
        if (f.xmax == f.xmin) {
            f.xmin -= 1.0;
            f.xmax += 1.0;
        }
        f.ymin = 0;
        f.ymax = 1;
        for (std::size_t c : d.histogram.counts) {
            f.ymax = std::max(f.ymax, static_cast<double>(c));
        }
        f.ymax *= 1.1;
        append_panel_box(svg, f, "Histogram");
        for (std::size_t i = 0; i < d.histogram.counts.size(); ++i) {
            double e0 = d.histogram.edges[i];
            double e1 = d.histogram.edges[i + 1];
            if (e1 == e0) { // degenerate single bin: draw a visible sliver
                e0 -= 0.25;
                e1 += 0.25;
            }
            const double c = static_cast<double>(d.histogram.counts[i]);
            svg += "<rect x=\"" + coord(f.px(e0)) + "\" y=\"" + coord(f.py(c)) +
                   "\" width=\"" + coord(f.px(e1) - f.px(e0)) + "\" height=\"" +
                   coord(f.py(0) - f.py(c)) +
                   "\" fill=\"steelblue\" stroke=\"black\" stroke-width=\"0.7\"/>\n";
        }
    }
    // Panel 4 (bottom-right): residuals versus observation order.
    {
        PanelFrame f{x_right, y_bottom, panel_w, panel_h, 0, 0, 0, 0};
        f.xmin = 0.5;
        f.xmax = static_cast<double>(d.vs_order.size()) + 0.5;
        f.ymin = f.ymax = d.vs_order.front().second;
        std::vector<std::pair<double, double>> pts;
        pts.reserve(d.vs_order.size());
        for (const auto& [i, r] : d.vs_order) {
            f.ymin = std::min(f.ymin, r);
            f.ymax = std::max(f.ymax, r);
            pts.emplace_back(static_cast<double>(i), r);
        }
        pad_range(f.ymin, f.ymax);
        append_panel_box(svg, f, "Versus Order");
        append_zero_line(svg, f);
        // Connect consecutive observations, the usual order-plot style.
        for (std::size_t i = 1; i < pts.size(); ++i) {
            svg += "<line x1=\"" + coord(f.px(pts[i - 1].first)) + "\" y1=\"" +
                   coord(f.py(pts[i - 1].second)) + "\" x2=\"" +
                   coord(f.px(pts[i].first)) + "\" y2=\"" +
                   coord(f.py(pts[i].second)) +
                   "\" stroke=\"steelblue\" stroke-width=\"1\"/>\n";
        }
        append_points(svg, f, pts);
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace

std::vector<RenderedView> render_plots(const ResidualDiagnostics& diag,
                                       RenderFormat format) {
    std::vector<RenderedView> views;
    switch (format) {
        case RenderFormat::csv:
            views.push_back({"residuals_vs_fitted.csv", render_vs_fitted_csv(diag)});
            views.push_back({"normal_plot.csv", render_normal_plot_csv(diag)});
            views.push_back({"histogram.csv", render_histogram_csv(diag)});
            views.push_back({"residuals_vs_order.csv", render_vs_order_csv(diag)});
            break;
        case RenderFormat::svg:
            views.push_back({"residuals.svg", render_svg(diag)});
            break;
    }
    return views;
}

} // namespace defpred::diagnostics
