#include "cctsens/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "cctsens/algebraic.hpp"
#include "cctsens/errors.hpp"
#include "cctsens/roots.hpp"
#include "cctsens/sensitivity.hpp"

namespace cctsens {

namespace {

// Derivative of the stage flow at x, with y re-solved and warm-started
// through `y_work`.
struct StageFlow {
    const DaeModel& model;
    Stage stage;
    const ParameterSet& p;
    double tol;
    Vec y_work;

    Vec operator()(const Vec& x) {
        y_work = newton_algebraic(model, stage, x, y_work, p, tol);
        return model.f(stage, x, y_work, p);
    }
};

// One RK4 step of the stage flow; y_work ends warm at the last
// evaluation point.
Vec flow_step(StageFlow& flow, const Vec& x, double h) {
    const Vec k1 = flow(x);
    const Vec k2 = flow(x + (h / 2.0) * k1);
    const Vec k3 = flow(x + (h / 2.0) * k2);
    const Vec k4 = flow(x + h * k3);
    Vec out = x;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

struct ShadowProbe {
    bool valid = false;
    Vec x;
    Vec y_post;
    double delta = 0.0;
};

} // namespace

Trajectory integrate_stage(const DaeModel& model, Stage stage, const Vec& x0,
                           const Vec& y0_guess, const ParameterSet& p, double t_end,
                           double h, const SolverSettings& settings) {
    Trajectory traj;
    traj.stage = stage;
    StageFlow flow{model, stage, p, settings.algebraic_tol, y0_guess};
    // Inconsistent initial conditions propagate as AlgebraicConvergenceError.
    Vec y = newton_algebraic(model, stage, x0, y0_guess, p, settings.algebraic_tol);
    flow.y_work = y;
    Vec x = x0;
    double t = 0.0;
    traj.samples.push_back({t, x, y});
    double eq_since = -1.0;
    while (t < t_end - 1e-12) {
        const double step = std::min(h, t_end - t);
        try {
            x = flow_step(flow, x, step);
            y = newton_algebraic(model, stage, x, flow.y_work, p, settings.algebraic_tol);
        } catch (const AlgebraicConvergenceError&) {
            traj.termination = {Termination::Kind::AlgebraicFailure, t};
            return traj;
        }
        t += step;
        traj.samples.push_back({t, x, y});
        if (norm2(model.f(stage, x, y, p)) <= settings.equilibrium_tol) {
            if (eq_since < 0.0) eq_since = t;
            if (t - eq_since >= settings.equilibrium_hold) {
                traj.termination = {Termination::Kind::Converged, t};
                return traj;
            }
        } else {
            eq_since = -1.0;
        }
    }
    traj.termination = {Termination::Kind::TimeLimit, t};
    return traj;
}

namespace {

// Localizes the fold inside (t_a, t_a + span]. The shadow determinant
// behaves like sqrt(t_fold - t) near a fold, so the search runs a secant
// on delta^2 (linear there) guarded by bisection on shadow validity,
// then polishes {g_post = 0, delta_post = 0} in (dt, y) by Newton.
std::optional<FoldEvent> localize_fold(const DaeModel& model, const ParameterSet& p,
                                       const SolverSettings& settings, double t_a,
                                       const Vec& x_a, const Vec& y_fault_a,
                                       const Vec& y_shadow_a, double delta_a, double span,
                                       double tol_sing) {
    auto state_at = [&](double dt) {
        StageFlow flow{model, Stage::FaultOn, p, settings.algebraic_tol, y_fault_a};
        return flow_step(flow, x_a, dt);
    };
    auto probe = [&](double dt) {
        ShadowProbe pr;
        try {
            pr.x = state_at(dt);
            pr.y_post = newton_algebraic(model, Stage::PostFault, pr.x, y_shadow_a, p,
                                         settings.algebraic_tol);
            pr.delta = model.delta(Stage::PostFault, pr.x, pr.y_post, p);
            pr.valid = true;
        } catch (const AlgebraicConvergenceError&) {
            pr.valid = false;
        }
        return pr;
    };

    double lo = 0.0, hi = span;
    ShadowProbe best{true, x_a, y_shadow_a, delta_a};
    double best_dt = 0.0;
    // Secant memory: two most recent pre-fold samples of delta^2.
    double t1 = 0.0, d1 = delta_a * delta_a;
    bool have_two = false;
    double t2 = 0.0, d2 = 0.0;
    for (int it = 0; it < 80 && hi - lo > settings.fold_time_tol; ++it) {
        double t_try = 0.5 * (lo + hi);
        if (have_two && d1 != d2) t_try = t2 + d2 * (t2 - t1) / (d1 - d2);
        const double w = hi - lo;
        if (!std::isfinite(t_try) || t_try < lo + 0.02 * w || t_try > hi - 0.02 * w)
            t_try = 0.5 * (lo + hi);
        const ShadowProbe pr = probe(t_try);
        const bool pre_fold = pr.valid && std::abs(pr.delta) > tol_sing &&
                              pr.delta * delta_a > 0.0;
        if (pre_fold) {
            lo = t_try;
            if (std::abs(pr.delta) < std::abs(best.delta)) {
                best = pr;
                best_dt = t_try;
            }
            if (have_two) {
                t1 = t2;
                d1 = d2;
            }
            t2 = t_try;
            d2 = pr.delta * pr.delta;
            have_two = true;
        } else {
            hi = t_try;
        }
    }

    // Newton polish on z = (dt, y).
    const int m = model.m();
    double dt = best_dt;
    Vec y = best.y_post;
    const double scale = std::max(1.0, std::abs(delta_a));
    bool polished = false;
    for (int it = 0; it < 40; ++it) {
        Vec x;
        try {
            x = state_at(dt);
        } catch (const AlgebraicConvergenceError&) {
            return std::nullopt;
        }
        const Vec g = model.g(Stage::PostFault, x, y, p);
        const double delta = model.delta(Stage::PostFault, x, y, p);
        double fn = std::abs(delta);
        for (double gi : g) fn = std::max(fn, std::abs(gi));
        if (fn <= 1e-12 * scale) {
            polished = true;
            break;
        }
        // Flow direction for the d/dt column.
        StageFlow flow{model, Stage::FaultOn, p, settings.algebraic_tol, y_fault_a};
        const Vec fdir = flow(x);
        const Matrix gx = model.dg_dx(Stage::PostFault, x, y, p);
        const Matrix gy = model.dg_dy(Stage::PostFault, x, y, p);
        // Determinant derivatives by central differences.
        Vec ddelta_dy(m);
        for (int j = 0; j < m; ++j) {
            const double hs = 1e-6 * std::max(1.0, std::abs(y[j]));
            Vec yp = y, ym = y;
            yp[j] += hs;
            ym[j] -= hs;
            ddelta_dy[j] = (model.delta(Stage::PostFault, x, yp, p) -
                            model.delta(Stage::PostFault, x, ym, p)) /
                           (2.0 * hs);
        }
        double ddelta_dt = 0.0;
        for (int j = 0; j < model.n(); ++j) {
            const double hs = 1e-6 * std::max(1.0, std::abs(x[j]));
            Vec xp = x, xm = x;
            xp[j] += hs;
            xm[j] -= hs;
            ddelta_dt += (model.delta(Stage::PostFault, xp, y, p) -
                          model.delta(Stage::PostFault, xm, y, p)) /
                         (2.0 * hs) * fdir[j];
        }
        Matrix jac(m + 1, m + 1);
        const Vec gxf = gx * fdir;
        for (int i = 0; i < m; ++i) {
            jac(i, 0) = gxf[i];
            for (int j = 0; j < m; ++j) jac(i, j + 1) = gy(i, j);
        }
        jac(m, 0) = ddelta_dt;
        for (int j = 0; j < m; ++j) jac(m, j + 1) = ddelta_dy[j];
        Vec res(m + 1);
        for (int i = 0; i < m; ++i) res[i] = g[i];
        res[m] = delta;
        Vec dz;
        try {
            dz = lu_solve(jac, res);
        } catch (const SingularMatrixError&) {
            return std::nullopt;
        }
        dt -= dz[0];
        dt = std::clamp(dt, -0.5 * span, 1.5 * span);
        for (int j = 0; j < m; ++j) y[j] -= dz[j + 1];
    }
    if (!polished) return std::nullopt;

    FoldEvent ev;
    ev.t_fold = t_a + dt;
    ev.x_cl = state_at(dt);
    ev.y_post_cl = y;
    ev.delta_residual = model.delta(Stage::PostFault, ev.x_cl, y, p);
    const auto nullres = left_null_vector(model.dg_dy(Stage::PostFault, ev.x_cl, y, p),
                                          std::max(1e-8, tol_sing));
    ev.sigma_min = nullres.sigma_min;
    return ev;
}

} // namespace

FaultShadowResult integrate_fault_with_shadow(const StagedScenario& scenario,
                                              const ParameterSet& p, double t_max,
                                              double h) {
    const DaeModel& model = *scenario.model;
    const SolverSettings& settings = scenario.settings;
    FaultShadowResult out;

    const SepSolution sep = find_sep(model, Stage::PreFault, p, scenario.sep_guess());
    out.delta_ref = model.delta(Stage::PostFault, sep.x_s, sep.y_s, p);
    const double tol_sing = settings.singularity_rtol * std::abs(out.delta_ref);

    Trajectory& traj = out.trajectory;
    traj.stage = Stage::FaultOn;

    StageFlow flow{model, Stage::FaultOn, p, settings.algebraic_tol, sep.y_s};
    Vec x = sep.x_s;
    Vec y_fault = newton_algebraic(model, Stage::FaultOn, x, sep.y_s, p,
                                   settings.algebraic_tol);
    flow.y_work = y_fault;
    Vec y_shadow = newton_algebraic(model, Stage::PostFault, x, sep.y_s, p,
                                    settings.algebraic_tol);
    double delta = model.delta(Stage::PostFault, x, y_shadow, p);
    double t = 0.0;
    traj.samples.push_back({t, x, y_fault});
    traj.shadow.push_back({y_shadow, delta});

    while (t < t_max - 1e-12) {
        const double step = std::min(h, t_max - t);
        Vec x_new;
        Vec y_fault_new;
        try {
            x_new = flow_step(flow, x, step);
            y_fault_new = newton_algebraic(model, Stage::FaultOn, x_new, flow.y_work, p,
                                           settings.algebraic_tol);
        } catch (const AlgebraicConvergenceError&) {
            traj.termination = {Termination::Kind::AlgebraicFailure, t};
            return out;
        }
        bool shadow_ok = false;
        Vec y_shadow_new;
        double delta_new = 0.0;
        try {
            y_shadow_new = newton_algebraic(model, Stage::PostFault, x_new, y_shadow, p,
                                            settings.algebraic_tol);
            delta_new = model.delta(Stage::PostFault, x_new, y_shadow_new, p);
            shadow_ok = std::abs(delta_new) > tol_sing && delta_new * delta > 0.0;
        } catch (const AlgebraicConvergenceError&) {
            shadow_ok = false;
        }
        if (!shadow_ok) {
            out.fold = localize_fold(model, p, settings, t, x, y_fault, y_shadow, delta,
                                     step, tol_sing);
            if (out.fold) {
                const FoldEvent& ev = *out.fold;
                StageFlow tail{model, Stage::FaultOn, p, settings.algebraic_tol, y_fault};
                const Vec x_ev = ev.x_cl;
                Vec y_fault_ev = y_fault;
                try {
                    y_fault_ev = newton_algebraic(model, Stage::FaultOn, x_ev, y_fault, p,
                                                  settings.algebraic_tol);
                } catch (const AlgebraicConvergenceError&) {
                }
                traj.samples.push_back({ev.t_fold, x_ev, y_fault_ev});
                traj.shadow.push_back({ev.y_post_cl, ev.delta_residual});
                traj.termination = {Termination::Kind::FoldHit, ev.t_fold};
            } else {
                traj.termination = {Termination::Kind::AlgebraicFailure, t};
            }
            return out;
        }
        x = x_new;
        y_fault = y_fault_new;
        y_shadow = y_shadow_new;
        delta = delta_new;
        t += step;
        traj.samples.push_back({t, x, y_fault});
        traj.shadow.push_back({y_shadow, delta});
    }
    traj.termination = {Termination::Kind::TimeLimit, t};
    return out;
}

bool clearing_consistent(const StagedScenario& scenario, const ParameterSet& p,
                         const Vec& x_cl) {
    const DaeModel& model = *scenario.model;
    const SepSolution sep = find_sep(model, Stage::PreFault, p, scenario.sep_guess());
    const double delta_ref = model.delta(Stage::PostFault, sep.x_s, sep.y_s, p);
    const double tol_sing = singularity_tol(scenario, delta_ref);

    // Continue the operating branch from the SEP to the clearing state in
    // x; a root of g that is not connected to that branch (e.g. a
    // negative-voltage solution past the fold) does not count.
    constexpr int kSteps = 64;
    Vec y = sep.y_s;
    try {
        for (int k = 1; k <= kSteps; ++k) {
            const double s = double(k) / kSteps;
            Vec x(x_cl.size());
            for (std::size_t j = 0; j < x.size(); ++j)
                x[j] = (1.0 - s) * sep.x_s[j] + s * x_cl[j];
            y = newton_algebraic(model, Stage::PostFault, x, y, p,
                                 scenario.settings.algebraic_tol);
            if (std::abs(model.delta(Stage::PostFault, x, y, p)) <= tol_sing) return false;
        }
    } catch (const AlgebraicConvergenceError&) {
        return false;
    }
    return true;
}

PostFaultVerdict post_fault_stable(const StagedScenario& scenario, const ParameterSet& p,
                                   const Vec& x_cl, double t_settle) {
    const DaeModel& model = *scenario.model;
    const SolverSettings& settings = scenario.settings;

    const SepSolution sep_post = find_sep(model, Stage::PostFault, p, scenario.sep_guess());
    const double delta_ref = model.delta(Stage::PostFault, sep_post.x_s, sep_post.y_s, p);
    const double tol_sing = singularity_tol(scenario, delta_ref);

    // Branch-aware consistency at the clearing point itself.
    if (!clearing_consistent(scenario, p, x_cl))
        return {VerdictKind::FoldHit, 0.0}; // clearing into collapse
    Vec y = newton_algebraic(model, Stage::PostFault, x_cl, sep_post.y_s, p,
                             settings.algebraic_tol);

    StageFlow flow{model, Stage::PostFault, p, settings.algebraic_tol, y};
    Vec x = x_cl;
    double t = 0.0;
    double eq_since = -1.0;
    while (t < t_settle) {
        try {
            x = flow_step(flow, x, settings.h);
            y = newton_algebraic(model, Stage::PostFault, x, flow.y_work, p,
                                 settings.algebraic_tol);
        } catch (const AlgebraicConvergenceError&) {
            return {VerdictKind::FoldHit, t};
        }
        t += settings.h;
        if (std::abs(model.delta(Stage::PostFault, x, y, p)) <= tol_sing)
            return {VerdictKind::FoldHit, t};
        if (norm_inf(x) > settings.diverge_bound) return {VerdictKind::Diverged, t};
        if (norm2(model.f(Stage::PostFault, x, y, p)) <= settings.equilibrium_tol) {
            if (eq_since < 0.0) eq_since = t;
            if (t - eq_since >= settings.equilibrium_hold)
                return {norm2(x - sep_post.x_s) <= 1e-3 ? VerdictKind::Stable
                                                        : VerdictKind::Diverged,
                        t};
        } else {
            eq_since = -1.0;
        }
    }
    // Horizon exhausted: close to the SEP counts as settled.
    return {norm2(x - sep_post.x_s) <= 1e-2 ? VerdictKind::Stable : VerdictKind::Diverged,
            t};
}

} // namespace cctsens
