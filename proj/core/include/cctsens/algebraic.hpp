#pragma once

#include "cctsens/model.hpp"

namespace cctsens {

/// Solves g_stage(x, y, p) = 0 for y by damped Newton, warm-started from
/// y_guess. Converges to the solution branch the guess lies in.
/// Throws AlgebraicConvergenceError (carrying the last iterate and the
/// last |det(dg/dy)|) when the residual cannot be driven below `tol`
/// within `max_iter` iterations.
Vec newton_algebraic(const DaeModel& model, Stage stage, const Vec& x, const Vec& y_guess,
                     const ParameterSet& p, double tol = 1e-10, int max_iter = 50);

} // namespace cctsens
