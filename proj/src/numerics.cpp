#include "defpred/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "defpred/errors.hpp"

namespace defpred::numerics {

namespace {

constexpr double pi = 3.14159265358979323846;

// Largest |R[k][k]| of a factorization, used as the scale for the rank test.
double max_abs_rdiag(const QrFactors& f) {
    double m = 0.0;
    for (double d : f.rdiag) m = std::max(m, std::fabs(d));
    return m;
}

// Throws when any diagonal entry of R is negligible relative to the largest,
// naming the first offending column (0-based, in design-matrix order).
void check_rank(const QrFactors& f) {
    const double scale = max_abs_rdiag(f);
    for (std::size_t j = 0; j < f.p; ++j) {
        if (std::fabs(f.rdiag[j]) <= rank_tolerance * scale || scale == 0.0) {
            throw NumericError("rank-deficient design matrix: collinear column index " +
                               std::to_string(j));
        }
    }
}

} // namespace

LeastSquaresSolution qr_least_squares(const Matrix& x, const std::vector<double>& y) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (p < 1) throw NumericError("least squares requires at least one column");
    if (y.size() != n) throw NumericError("dimension mismatch between X and y");
    if (n < p) {
        throw NumericError("insufficient degrees of freedom: n=" + std::to_string(n) +
                           " rows < p=" + std::to_string(p) + " columns");
    }
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw NumericError("non-finite entry in design matrix");
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw NumericError("non-finite entry in target vector");
    }

    LeastSquaresSolution sol;
    sol.qr.qr = x;
    sol.qr.rdiag.assign(p, 0.0);
    sol.qr.n = n;
    sol.qr.p = p;
    Matrix& a = sol.qr.qr;

    // Column-by-column Householder reduction. After the loop, column k of
    // `a` holds the essential reflector below the diagonal and the strict
    // upper triangle holds R; rdiag holds R's diagonal.
    for (std::size_t k = 0; k < p; ++k) {
        double nrm = 0.0;
        for (std::size_t i = k; i < n; ++i) nrm = std::hypot(nrm, a(i, k));
        if (nrm == 0.0) {
            sol.qr.rdiag[k] = 0.0; // exactly-zero column; rank check reports it
            continue;
        }
        if (a(k, k) < 0.0) nrm = -nrm;
        for (std::size_t i = k; i < n; ++i) a(i, k) /= nrm;
        a(k, k) += 1.0;
        for (std::size_t j = k + 1; j < p; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += a(i, k) * a(i, j);
            s = -s / a(k, k);
            for (std::size_t i = k; i < n; ++i) a(i, j) += s * a(i, k);
        }
        sol.qr.rdiag[k] = -nrm;
    }
    check_rank(sol.qr);

    // Apply Q^T to y, then back-substitute R beta = (Q^T y)[0..p).
    std::vector<double> qty = y;
    for (std::size_t k = 0; k < p; ++k) {
        double s = 0.0;
        for (std::size_t i = k; i < n; ++i) s += a(i, k) * qty[i];
        s = -s / a(k, k);
        for (std::size_t i = k; i < n; ++i) qty[i] += s * a(i, k);
    }
    sol.beta.assign(p, 0.0);
    for (std::size_t k = p; k-- > 0;) {
        double s = qty[k];
        for (std::size_t j = k + 1; j < p; ++j) s -= a(k, j) * sol.beta[j];
        sol.beta[k] = s / sol.qr.rdiag[k];
    }
    // The transformed tail of y is the residual in the rotated frame, so its
    // squared norm equals ||y - X beta||^2.
    double sse = 0.0;
    for (std::size_t i = p; i < n; ++i) sse += qty[i] * qty[i];
    sol.sse = sse;
    return sol;
}

Matrix xtx_inverse(const QrFactors& qr) {
    const std::size_t p = qr.p;
    if (p == 0 || qr.rdiag.size() != p) throw NumericError("invalid QR factorization");
    check_rank(qr);

    // Columns of R^{-1} by back substitution: solve R u = e_k.
    Matrix rinv(p, p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        rinv(k, k) = 1.0 / qr.rdiag[k];
        for (std::size_t i = k; i-- > 0;) {
            double s = 0.0;
            for (std::size_t j = i + 1; j <= k; ++j) s -= qr.qr(i, j) * rinv(j, k);
            rinv(i, k) = s / qr.rdiag[i];
        }
    }
    // (X^T X)^{-1} = R^{-1} R^{-T}; the k-sum form is symmetric in (i, j)
    // by construction, so the result is exactly symmetric.
    Matrix inv(p, p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double s = 0.0;
            for (std::size_t k = std::max(i, j); k < p; ++k) s += rinv(i, k) * rinv(j, k);
            inv(i, j) = s;
            inv(j, i) = s;
        }
    }
    return inv;
}

double ln_gamma(double x) {
    if (!(x > 0.0)) throw NumericError("ln_gamma requires x > 0");
    // Lanczos approximation, g = 7, 9 coefficients; ~1e-14 relative error.
    static const double cof[9] = {
        0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,    12.507343278686905,
        -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) {
        // Reflection keeps the series on its accurate side of the domain.
        return std::log(pi / std::sin(pi * x)) - ln_gamma(1.0 - x);
    }
    const double z = x - 1.0;
    double a = cof[0];
    for (int i = 1; i < 9; ++i) a += cof[i] / (z + i);
    const double t = z + 7.5;
    return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

namespace {

// Continued-fraction kernel for the incomplete beta (modified Lentz method).
// Converges rapidly for x < (a + 1)/(a + b + 2); the caller applies the
// symmetry transform for the other half of the domain.
double beta_cont_frac(double a, double b, double x) {
    constexpr int max_iter = 300;
    const double eps = std::numeric_limits<double>::epsilon();
    const double fpmin = std::numeric_limits<double>::min() / eps;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= eps) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

} // namespace

double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw NumericError("reg_inc_beta requires a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw NumericError("reg_inc_beta requires x in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_bt = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * beta_cont_frac(a, b, x) / a;
    }
    return 1.0 - bt * beta_cont_frac(b, a, 1.0 - x) / b;
}

double t_cdf(double x, double df) {
    if (!(df > 0.0)) throw NumericError("t_cdf requires df > 0");
    if (std::isnan(x)) throw NumericError("t_cdf requires a non-NaN argument");
    if (x == 0.0) return 0.5;
    if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
    // P(T <= x) in terms of the incomplete beta of the symmetric tail:
    // I_w(df/2, 1/2) with w = df/(df + x^2) is twice the outer tail mass.
    const double w = df / (df + x * x);
    const double tail = 0.5 * reg_inc_beta(0.5 * df, 0.5, w);
    return x > 0.0 ? 1.0 - tail : tail;
}

namespace {

// Student-t density, used for Newton steps in the quantile solver.
double t_pdf(double x, double df) {
    const double ln_f = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) -
                        0.5 * std::log(df * pi) -
                        0.5 * (df + 1.0) * std::log1p(x * x / df);
    return std::exp(ln_f);
}

} // namespace

double t_quantile(double p, double df) {
    if (!(df > 0.0)) throw NumericError("t_quantile requires df > 0");
    if (!(p > 0.0 && p < 1.0)) throw NumericError("t_quantile requires p in (0, 1)");
    if (p == 0.5) return 0.0;

    // Solve on the upper tail and mirror; the CDF is strictly increasing.
    const double q = p > 0.5 ? p : 1.0 - p;
    double lo = 0.0;
    double hi = 1.0;
    while (t_cdf(hi, df) < q) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) break; // q indistinguishable from 1 at double precision
    }
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = t_cdf(x, df) - q;
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        if (std::fabs(f) <= 1e-13 || (hi - lo) <= 1e-15 * std::max(1.0, std::fabs(x))) break;
        const double g = t_pdf(x, df);
        double next = g > 0.0 ? x - f / g : x;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi); // Newton left the bracket
        x = next;
    }
    return p > 0.5 ? x : -x;
}

double f_cdf(double x, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0)) throw NumericError("f_cdf requires df1, df2 > 0");
    if (std::isnan(x) || x < 0.0) throw NumericError("f_cdf requires x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double w = df1 * x / (df1 * x + df2);
    return reg_inc_beta(0.5 * df1, 0.5 * df2, w);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw NumericError("normal_quantile requires p in (0, 1)");

    // Acklam's rational approximation (|relative error| < 1.15e-9), then one
    // Halley-style correction against the erfc-based CDF for ~1e-15 accuracy.
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-(p)));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

} // namespace defpred::numerics
