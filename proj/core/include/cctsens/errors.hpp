#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cctsens {

/// Base class for recoverable numerical failures.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pivot below threshold during LU factorization. Near the singular
/// surface this is a signal, not a fatal condition.
class SingularMatrixError : public NumericError {
public:
    using NumericError::NumericError;
};

/// left_null_vector called on a matrix whose smallest singular value
/// exceeds the singularity tolerance.
class NotSingularError : public NumericError {
public:
    NotSingularError(const std::string& msg, double sigma_min)
        : NumericError(msg), sigma_min(sigma_min) {}
    double sigma_min;
};

/// Newton failed to satisfy the algebraic constraint. Carries the last
/// iterate and |det(dg/dy)| there; the simulator reads these as the
/// fold-detection signal.
class AlgebraicConvergenceError : public NumericError {
public:
    AlgebraicConvergenceError(const std::string& msg,
                              std::vector<double> last_y,
                              double last_abs_det)
        : NumericError(msg), last_y(std::move(last_y)),
          last_abs_det(last_abs_det) {}
    std::vector<double> last_y;
    double last_abs_det;
};

class ConvergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

class NoBracketError : public NumericError {
public:
    using NumericError::NumericError;
};

/// No fold point exists (E^2 < 4*Ql*X for the SMIB locus, or no event
/// within the integration horizon).
class NoFoldError : public NumericError {
public:
    using NumericError::NumericError;
};

/// |v*^T C1 B2| below tolerance: the fault-on trajectory is tangent to
/// the fold and the first-order sensitivity formula is invalid.
class TransversalityError : public NumericError {
public:
    using NumericError::NumericError;
};

class ContinuationStallError : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace cctsens
