#include "cctsens/algebraic.hpp"

#include <cmath>

#include "cctsens/errors.hpp"

namespace cctsens {

Vec newton_algebraic(const DaeModel& model, Stage stage, const Vec& x, const Vec& y_guess,
                     const ParameterSet& p, double tol, int max_iter) {
    Vec y = y_guess;
    Vec res = model.g(stage, x, y, p);
    double rn = norm2(res);
    double abs_det = std::abs(model.delta(stage, x, y, p));
    for (int it = 0; it < max_iter; ++it) {
        if (rn <= tol) return y;
        const Matrix gy = model.dg_dy(stage, x, y, p);
        abs_det = std::abs(determinant(gy));
        Vec step;
        try {
            step = lu_solve(gy, res);
        } catch (const SingularMatrixError&) {
            throw AlgebraicConvergenceError("newton_algebraic: singular dg/dy", y, abs_det);
        }
        // Damp until the residual actually decreases.
        double lambda = 1.0;
        while (lambda > 1e-4) {
            const Vec y_try = y - lambda * step;
            const Vec res_try = model.g(stage, x, y_try, p);
            const double rn_try = norm2(res_try);
            if (rn_try < rn || rn_try <= tol) {
                y = y_try;
                res = res_try;
                rn = rn_try;
                break;
            }
            lambda *= 0.5;
        }
        if (lambda <= 1e-4)
            throw AlgebraicConvergenceError("newton_algebraic: step damping failed", y, abs_det);
    }
    if (rn <= tol) return y;
    throw AlgebraicConvergenceError("newton_algebraic: no convergence in max_iter", y, abs_det);
}

} // namespace cctsens
