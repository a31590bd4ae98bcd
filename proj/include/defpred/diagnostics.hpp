#ifndef DEFPRED_DIAGNOSTICS_HPP
#define DEFPRED_DIAGNOSTICS_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "defpred/regress.hpp"

namespace defpred::diagnostics {

// The four residual views behind a standard regression diagnostic panel:
// residuals vs fitted values, normal probability plot, residual histogram,
// and residuals vs observation order.
struct ResidualDiagnostics {
    std::vector<std::pair<double, double>> points_vs_fitted; // (fitted, residual)
    std::vector<std::pair<double, double>> normal_plot;      // (theoretical quantile, ordered residual)
    struct Histogram {
        std::vector<double> edges;       // bin_count + 1 ascending edges
        std::vector<std::size_t> counts; // sums to n
    } histogram;
    std::vector<std::pair<std::size_t, double>> vs_order; // (1-based index, residual)
};

// Build all four views from a model carrying training residuals.
// Normal-plot positions are Blom's (i - 0.375)/(n + 0.25) mapped through the
// standard normal quantile; histogram bin count follows Sturges' rule
// (ceil(log2 n) + 1) over [min, max] with right-open bins (last bin closed);
// a zero-range residual set degenerates to a single bin. Throws NumericError
// when n < 2 and DataError when the model has no residual vectors.
ResidualDiagnostics compute_diagnostics(const regress::FittedModel& m);

enum class RenderFormat { csv, svg };

// A rendered diagnostic document: file name plus content bytes.
struct RenderedView {
    std::string filename;
    std::string content;
};

// Render the views. CSV yields four files (residuals_vs_fitted.csv,
// normal_plot.csv, histogram.csv, residuals_vs_order.csv); SVG yields one
// four-panel residuals.svg. Output bytes are deterministic for identical
// input.
std::vector<RenderedView> render_plots(const ResidualDiagnostics& diag, RenderFormat format);

} // namespace defpred::diagnostics

#endif // DEFPRED_DIAGNOSTICS_HPP
