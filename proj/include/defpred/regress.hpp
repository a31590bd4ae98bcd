#ifndef DEFPRED_REGRESS_HPP
#define DEFPRED_REGRESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "defpred/dataset.hpp"
#include "defpred/model_spec.hpp"
#include "defpred/numerics.hpp"

namespace defpred::regress {

// A fitted OLS model with everything needed for inference and prediction
// intervals. Term arrays are aligned with term_names; when the intercept is
// included it is the first term, named "intercept".
struct FittedModel {
    ModelSpec spec;
    std::size_t n = 0; // sample size
    std::size_t p = 0; // parameter count (predictors + intercept)

    std::vector<std::string> term_names;
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::vector<double> t_stats;  // NaN for a degenerate perfect fit
    std::vector<double> p_values; // 0 by convention for a degenerate perfect fit

    double s = 0;   // residual standard error, sqrt(sse / (n - p))
    double sse = 0; // residual sum of squares
    double sst = 0; // total sum of squares (about the mean when intercept on)
    double r_squared = 0;
    double adj_r_squared = 0;
    double f_stat = 0;    // NaN when p == 1 (no regression df) or on a perfect fit
    double f_p_value = 0; // NaN when p == 1; 0 on a perfect fit

    numerics::Matrix xtx_inv; // p-by-p (X^T X)^{-1}

    // Training-sample vectors; empty on a model loaded from a document
    // (the document does not carry them).
    std::vector<double> fitted;
    std::vector<double> residuals;

    // True when sse underflowed to zero relative to the data scale: standard
    // errors are 0 and t-stats undefined; p-values are reported as 0.
    bool degenerate_perfect_fit = false;
};

// Point prediction with confidence (mean-response) and prediction (single
// new observation) intervals. pi_low/ci_low are the raw, unclamped bounds;
// display clamping at zero is the caller's concern (display_pi_low helps).
struct PredictionResult {
    double point = 0;
    long long point_rounded = 0; // max(0, round(point))
    double pi_low = 0;
    double pi_high = 0;
    double ci_low = 0;
    double ci_high = 0;
    double level = 0.95;
    double leverage_term = 0; // x0^T (X^T X)^{-1} x0

    double display_pi_low() const { return pi_low < 0 ? 0.0 : pi_low; }
};

inline constexpr double default_level = 0.95;
inline constexpr std::int64_t model_schema_version = 1;

// Fit spec to dataset by QR least squares and derive the full inference
// summary: std_error[j] = s * sqrt((X^T X)^{-1}[j][j]), t[j] = coef[j] /
// se[j], p[j] = 2 * (1 - t_cdf(|t[j]|, n - p)), r2 = 1 - sse/sst,
// adj r2 = 1 - (1 - r2)(n - 1)/(n - p), F = ((sst - sse)/(p - 1)) /
// (sse/(n - p)). Throws NumericError on n <= p, rank deficiency, or a
// constant target (sst = 0, undefined R^2); DataError on bad spec/columns.
FittedModel fit(const dataset::Dataset& d, const ModelSpec& spec);

// Predict at a new predictor vector (aligned with spec.predictors; the
// intercept term is implicit). PI half-width is
// t_{(1+level)/2, n-p} * s * sqrt(1 + leverage); the CI half-width uses
// sqrt(leverage). Throws DataError on size mismatch, non-finite values, or
// level outside (0, 1).
PredictionResult predict(const FittedModel& m, const std::vector<double>& x0,
                         double level = default_level);

// Same, from a name -> value map that must cover every predictor.
PredictionResult predict(const FittedModel& m,
                         const std::map<std::string, double>& values,
                         double level = default_level);

// Recompute fitted values and residuals of a model on a dataset containing
// its spec's columns (used to rebuild diagnostics for a loaded model).
struct ModelApplication {
    std::vector<double> fitted;
    std::vector<double> residuals;
};
ModelApplication apply_to(const FittedModel& m, const dataset::Dataset& d);

// Serialize to the JSON model document (schema_version 1). Numbers carry 17
// significant digits; non-finite values serialize as null. Deterministic:
// identical models produce identical bytes.
std::string serialize_model(const FittedModel& m);

// Parse and validate a model document. Throws DataError on schema-version
// mismatch, missing fields (a document without xtx_inv "cannot produce
// intervals"), inconsistent sizes, or corrupted/non-finite prediction-
// critical numbers. Round trip: load_model(serialize_model(m)) preserves
// spec, n, p, coefficients, s, xtx_inv and the fit statistics bit-exactly.
FittedModel load_model(std::string_view document);

} // namespace defpred::regress

#endif // DEFPRED_REGRESS_HPP
