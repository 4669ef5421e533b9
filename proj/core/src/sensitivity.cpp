#include "cctsens/sensitivity.hpp"

#include <cmath>

#include "cctsens/algebraic.hpp"
#include "cctsens/errors.hpp"
#include "cctsens/roots.hpp"

namespace cctsens {

SepSolution find_sep(const DaeModel& model, Stage stage, const ParameterSet& p,
                     const State& guess, double tol) {
    const int n = model.n(), m = model.m();
    Vec x = guess.x, y = guess.y;

    auto residual = [&](const Vec& xx, const Vec& yy) {
        const Vec fv = model.f(stage, xx, yy, p);
        const Vec gv = model.g(stage, xx, yy, p);
        Vec r(n + m);
        for (int i = 0; i < n; ++i) r[i] = fv[i];
        for (int i = 0; i < m; ++i) r[n + i] = gv[i];
        return r;
    };

    Vec res = residual(x, y);
    double rn = norm2(res);
    for (int it = 0; it < 100 && rn > tol; ++it) {
        const Matrix fx = model.df_dx(stage, x, y, p);
        const Matrix fy = model.df_dy(stage, x, y, p);
        const Matrix gx = model.dg_dx(stage, x, y, p);
        const Matrix gy = model.dg_dy(stage, x, y, p);
        Matrix jac(n + m, n + m);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) jac(i, j) = fx(i, j);
            for (int j = 0; j < m; ++j) jac(i, n + j) = fy(i, j);
        }
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) jac(n + i, j) = gx(i, j);
            for (int j = 0; j < m; ++j) jac(n + i, n + j) = gy(i, j);
        }
        Vec step;
        try {
            step = lu_solve(jac, res);
        } catch (const SingularMatrixError&) {
            throw ConvergenceError("find_sep: singular stacked Jacobian");
        }
        double lambda = 1.0;
        bool accepted = false;
        while (lambda > 1e-4) {
            Vec x_try = x, y_try = y;
            for (int i = 0; i < n; ++i) x_try[i] -= lambda * step[i];
            for (int i = 0; i < m; ++i) y_try[i] -= lambda * step[n + i];
            const Vec res_try = residual(x_try, y_try);
            const double rn_try = norm2(res_try);
            if (rn_try < rn || rn_try <= tol) {
                x = x_try;
                y = y_try;
                res = res_try;
                rn = rn_try;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) throw ConvergenceError("find_sep: damping failed");
    }
    if (rn > tol) throw ConvergenceError("find_sep: no convergence");

    const Matrix gy = model.dg_dy(stage, x, y, p);
    double gy_scale = 0.0;
    for (std::size_t i = 0; i < gy.rows(); ++i)
        for (std::size_t j = 0; j < gy.cols(); ++j)
            gy_scale = std::max(gy_scale, std::abs(gy(i, j)));
    if (std::abs(determinant(gy)) <= 1e-8 * std::max(1.0, gy_scale))
        throw ConvergenceError("find_sep: equilibrium lies on the singular surface");
    return {std::move(x), std::move(y), rn};
}

Vec sep_sensitivity(const DaeModel& model, const ParameterSet& p, int param_index,
                    const SepSolution& sep, Stage stage) {
    const int n = model.n(), m = model.m();
    const Vec& x = sep.x_s;
    const Vec& y = sep.y_s;
    const Matrix fx = model.df_dx(stage, x, y, p);
    const Matrix fy = model.df_dy(stage, x, y, p);
    const Matrix gx = model.dg_dx(stage, x, y, p);
    const Matrix gy = model.dg_dy(stage, x, y, p);
    const Vec fp = model.df_dp(stage, x, y, p, param_index);
    const Vec gp = model.dg_dp(stage, x, y, p, param_index);

    // W = gy^-1 gx column by column, wp = gy^-1 gp; explicit inverses avoided.
    Matrix w(m, n);
    for (int j = 0; j < n; ++j) {
        Vec col(m);
        for (int i = 0; i < m; ++i) col[i] = gx(i, j);
        const Vec sol = lu_solve(gy, col);
        for (int i = 0; i < m; ++i) w(i, j) = sol[i];
    }
    const Vec wp = lu_solve(gy, gp);

    const Matrix reduced = fx - fy * w; // fx - fy gy^-1 gx
    const Vec rhs = fy * wp - fp;
    return lu_solve(reduced, rhs);
}

namespace {

// Packed augmented state: [x (n) | Phi (n*n, row-major) | phi_p (n)].
struct Packed {
    static Vec pack(const Vec& x, const Matrix& phi, const Vec& phi_p) {
        const int n = static_cast<int>(x.size());
        Vec z(n + n * n + n);
        for (int i = 0; i < n; ++i) z[i] = x[i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) z[n + i * n + j] = phi(i, j);
        for (int i = 0; i < n; ++i) z[n + n * n + i] = phi_p[i];
        return z;
    }
    static void unpack(const Vec& z, int n, Vec& x, Matrix& phi, Vec& phi_p) {
        x.assign(z.begin(), z.begin() + n);
        phi = Matrix(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) phi(i, j) = z[n + i * n + j];
        phi_p.assign(z.begin() + n + n * n, z.end());
    }
};

struct FaultVariationalRhs {
    const DaeModel& model;
    const ParameterSet& p;
    int param_index;
    double alg_tol;
    Vec y_warm;

    // dy_fault/d(col) from the algebraic row of the variational system:
    // gy * dy = -(gx * dx + [gp]).
    Matrix y_cols(const Matrix& gy, const Matrix& gx, const Matrix& dx) const {
        const int m = static_cast<int>(gy.rows());
        const int k = static_cast<int>(dx.cols());
        Matrix out(m, k);
        const Matrix rhs = gx * dx;
        for (int j = 0; j < k; ++j) {
            Vec col(m);
            for (int i = 0; i < m; ++i) col[i] = -rhs(i, j);
            const Vec sol = lu_solve(gy, col);
            for (int i = 0; i < m; ++i) out(i, j) = sol[i];
        }
        return out;
    }

    Vec operator()(double, const Vec& z) {
        const int n = model.n();
        Vec x, phi_p;
        Matrix phi;
        Packed::unpack(z, n, x, phi, phi_p);
        y_warm = newton_algebraic(model, Stage::FaultOn, x, y_warm, p, alg_tol);

        const Matrix fx = model.df_dx(Stage::FaultOn, x, y_warm, p);
        const Matrix fy = model.df_dy(Stage::FaultOn, x, y_warm, p);
        const Matrix gx = model.dg_dx(Stage::FaultOn, x, y_warm, p);
        const Matrix gy = model.dg_dy(Stage::FaultOn, x, y_warm, p);
        const Vec fp = model.df_dp(Stage::FaultOn, x, y_warm, p, param_index);
        const Vec gp = model.dg_dp(Stage::FaultOn, x, y_warm, p, param_index);

        // Effective dynamic Jacobian with the algebraic row eliminated.
        Matrix y_of_x(gy.rows(), n);
        {
            const Matrix rhs = gx; // gy * Y = -gx
            for (int j = 0; j < n; ++j) {
                Vec col(gy.rows());
                for (std::size_t i = 0; i < gy.rows(); ++i) col[i] = -rhs(i, j);
                const Vec sol = lu_solve(gy, col);
                for (std::size_t i = 0; i < gy.rows(); ++i) y_of_x(i, j) = sol[i];
            }
        }
        Vec y_of_p(gy.rows());
        {
            Vec col(gy.rows());
            for (std::size_t i = 0; i < gy.rows(); ++i) col[i] = -gp[i];
            y_of_p = lu_solve(gy, col);
        }
        const Matrix a_eff = fx + fy * y_of_x;
        const Vec b_p = fp + fy * y_of_p;

        const Vec xdot = model.f(Stage::FaultOn, x, y_warm, p);
        const Matrix phidot = a_eff * phi;
        const Vec phipdot = a_eff * phi_p + b_p;
        return Packed::pack(xdot, phidot, phipdot);
    }
};

} // namespace

VariationalHistory integrate_variational(const StagedScenario& scenario,
                                         const ParameterSet& p, int param_index,
                                         double t_end, double h,
                                         const std::optional<Vec>& x_start) {
    const DaeModel& model = *scenario.model;
    const SolverSettings& settings = scenario.settings;
    const int n = model.n(), m = model.m();

    const SepSolution sep = find_sep(model, Stage::PreFault, p, scenario.sep_guess());
    const double delta_ref = model.delta(Stage::PostFault, sep.x_s, sep.y_s, p);
    const double tol_sing = settings.singularity_rtol * std::abs(delta_ref);
    const double exclusion = 1e3 * tol_sing;

    VariationalHistory hist;
    hist.param_index = param_index;
    hist.delta_ref = delta_ref;
    hist.model = scenario.model;
    hist.params = p;
    hist.settings = settings;

    Vec x = x_start ? *x_start : sep.x_s;
    Matrix phi = Matrix::identity(n);
    Vec phi_p(n, 0.0);
    FaultVariationalRhs rhs{model, p, param_index, settings.algebraic_tol, sep.y_s};
    rhs.y_warm = newton_algebraic(model, Stage::FaultOn, x, sep.y_s, p,
                                  settings.algebraic_tol);
    Vec y_shadow_warm = sep.y_s;
    bool shadow_alive = true;

    auto record = [&](double t) {
        VariationalSample s;
        s.t = t;
        s.dx_dx0 = phi;
        s.dx_dp = phi_p;
        const Vec y_fault = newton_algebraic(model, Stage::FaultOn, x, rhs.y_warm, p,
                                             settings.algebraic_tol);
        const Matrix gy = model.dg_dy(Stage::FaultOn, x, y_fault, p);
        const Matrix gx = model.dg_dx(Stage::FaultOn, x, y_fault, p);
        const Vec gp = model.dg_dp(Stage::FaultOn, x, y_fault, p, param_index);
        s.dyfault_dx0 = rhs.y_cols(gy, gx, phi);
        {
            Vec col(m);
            const Vec gxp = gx * phi_p;
            for (int i = 0; i < m; ++i) col[i] = -(gxp[i] + gp[i]);
            s.dyfault_dp = lu_solve(gy, col);
        }
        if (shadow_alive) {
            try {
                y_shadow_warm = newton_algebraic(model, Stage::PostFault, x, y_shadow_warm,
                                                 p, settings.algebraic_tol);
                const double dlt = model.delta(Stage::PostFault, x, y_shadow_warm, p);
                if (std::abs(dlt) >= exclusion) {
                    const Matrix gy_post = model.dg_dy(Stage::PostFault, x, y_shadow_warm, p);
                    const Matrix gx_post = model.dg_dx(Stage::PostFault, x, y_shadow_warm, p);
                    const Vec gp_post =
                        model.dg_dp(Stage::PostFault, x, y_shadow_warm, p, param_index);
                    s.dypost_dx0 = rhs.y_cols(gy_post, gx_post, phi);
                    Vec col(m);
                    const Vec gxp = gx_post * phi_p;
                    for (int i = 0; i < m; ++i) col[i] = -(gxp[i] + gp_post[i]);
                    s.dypost_dp = lu_solve(gy_post, col);
                }
                // Inside the exclusion window the post-surface columns stay
                // absent: they blow up at the fold and consumers must not
                // read stale values there.
            } catch (const AlgebraicConvergenceError&) {
                shadow_alive = false;
            }
        }
        hist.samples.push_back(std::move(s));
        hist.base.push_back({t, x, newton_algebraic(model, Stage::FaultOn, x, rhs.y_warm,
                                                    p, settings.algebraic_tol)});
    };

    double t = 0.0;
    record(t);
    while (t < t_end - 1e-12) {
        const double step = std::min(h, t_end - t);
        Vec z = Packed::pack(x, phi, phi_p);
        z = rk4_step([&rhs](double tt, const Vec& zz) { return rhs(tt, zz); }, t, z, step);
        Packed::unpack(z, n, x, phi, phi_p);
        t += step;
        record(t);
    }
    hist.valid_to = t;
    return hist;
}

ClearingBlocks clearing_blocks(const VariationalHistory& history, double t_cl) {
    if (history.samples.empty() || t_cl < -1e-12 ||
        t_cl > history.valid_to + history.settings.h)
        throw NumericError("clearing_blocks: t_cl outside the integrated horizon");
    const DaeModel& model = *history.model;
    const ParameterSet& p = history.params;

    // Latest grid sample at or before t_cl.
    std::size_t idx = 0;
    for (std::size_t i = 0; i < history.samples.size(); ++i)
        if (history.samples[i].t <= t_cl + 1e-12) idx = i;
    const VariationalSample& s = history.samples[idx];
    Vec x = history.base[idx].x;
    Matrix phi = s.dx_dx0;
    Vec phi_p = s.dx_dp;

    const double rem = t_cl - s.t;
    Vec y_fault = history.base[idx].y;
    if (rem > 1e-12) {
        FaultVariationalRhs rhs{model, p, history.param_index,
                                history.settings.algebraic_tol, y_fault};
        Vec z = Packed::pack(x, phi, phi_p);
        z = rk4_step([&rhs](double tt, const Vec& zz) { return rhs(tt, zz); }, s.t, z, rem);
        Packed::unpack(z, model.n(), x, phi, phi_p);
        y_fault = newton_algebraic(model, Stage::FaultOn, x, rhs.y_warm, p,
                                   history.settings.algebraic_tol);
    }
    return {phi, model.f(Stage::FaultOn, x, y_fault, p), phi_p};
}

} // namespace cctsens
