#ifndef DEFPRED_NUMERICS_HPP
#define DEFPRED_NUMERICS_HPP

#include <cstddef>
#include <vector>

namespace defpred::numerics {

// Minimal dense row-major matrix of doubles. Only what the regression
// pipeline needs: storage, element access, and a couple of constructors.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Compact Householder QR factorization of an n-by-p matrix (n >= p).
// `qr` holds R in its upper triangle and the essential parts of the
// Householder vectors below the diagonal; `rdiag` holds the diagonal of R
// (kept separate because the storage slot is occupied by the reflector).
struct QrFactors {
    Matrix qr;                 // packed reflectors + strict upper triangle of R
    std::vector<double> rdiag; // diagonal of R, signed
    std::size_t n = 0;
    std::size_t p = 0;
};

struct LeastSquaresSolution {
    std::vector<double> beta; // p coefficients minimizing ||y - X beta||^2
    double sse = 0.0;         // ||y - X beta||^2
    QrFactors qr;
};

// Relative tolerance for declaring a column of R numerically zero: column j
// is collinear when |R[j][j]| <= rank_tolerance * max_k |R[k][k]|.
inline constexpr double rank_tolerance = 1e-10;

// Householder QR least squares. Throws NumericError when n < p
// ("insufficient degrees of freedom") or when a column is collinear under
// the rank tolerance (the message names the offending column index).
LeastSquaresSolution qr_least_squares(const Matrix& x, const std::vector<double>& y);

// (X^T X)^{-1} = R^{-1} R^{-T} from the factorization. Symmetric by
// construction. Throws NumericError on rank deficiency.
Matrix xtx_inverse(const QrFactors& qr);

// Natural log of the gamma function, Lanczos approximation.
// Relative error <= 1e-12 on [0.5, 200]. Throws NumericError for x <= 0.
double ln_gamma(double x);

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation. Absolute error <= 1e-12. Throws NumericError on domain
// violations or non-convergence.
double reg_inc_beta(double a, double b, double x);

// Student-t CDF with df > 0 degrees of freedom, via the incomplete beta.
double t_cdf(double x, double df);

// Inverse of t_cdf in its first argument: the unique x with
// t_cdf(x, df) = p, solved by monotone bracketing plus safeguarded Newton
// iteration. Satisfies |t_cdf(t_quantile(p, df), df) - p| <= 1e-9.
double t_quantile(double p, double df);

// F distribution CDF with (df1, df2) degrees of freedom.
double f_cdf(double x, double df1, double df2);

// Standard normal quantile (inverse CDF), rational approximation refined
// by one Newton step against the erfc-based CDF. Needed for normal
// probability plots. This is the df -> infinity limit of t_quantile.
double normal_quantile(double p);

} // namespace defpred::numerics

#endif // DEFPRED_NUMERICS_HPP
