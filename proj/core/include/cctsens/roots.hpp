#pragma once

#include <functional>

#include "cctsens/matrix.hpp"

namespace cctsens {

/// Root of fn on [lo, hi] with fn(lo)*fn(hi) <= 0, by bisection with
/// secant acceleration. Final bracket width <= tol.
/// Throws NoBracketError when the endpoints do not bracket a root.
double bracketed_root(const std::function<double(double)>& fn, double lo, double hi,
                      double tol);

/// One classical RK4 step for x' = deriv(t, x).
/// Throws NumericError on a non-finite derivative.
Vec rk4_step(const std::function<Vec(double, const Vec&)>& deriv, double t,
             const Vec& x, double h);

} // namespace cctsens
