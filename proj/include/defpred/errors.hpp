#ifndef DEFPRED_ERRORS_HPP
#define DEFPRED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace defpred {

// Raised for malformed or invalid input: bad CSV cells, violated record
// invariants, unknown column names, inconsistent model documents, bad
// user-supplied values. The CLI maps this family to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a computation cannot proceed numerically: rank-deficient
// design matrix, insufficient degrees of freedom, constant target,
// non-convergent special-function evaluation. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace defpred

#endif // DEFPRED_ERRORS_HPP
