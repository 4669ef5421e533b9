#include "cctsens/cct.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "cctsens/algebraic.hpp"
#include "cctsens/errors.hpp"

namespace cctsens {

const char* to_string(Mechanism m) {
    switch (m) {
        case Mechanism::FoldAtClearing: return "FoldAtClearing";
    }
    return "?";
}

const char* to_string(CctMethod m) {
    switch (m) {
        case CctMethod::EventDetection: return "event";
        case CctMethod::Bisection: return "bisection";
    }
    return "?";
}

namespace {

// Fault-on state at clearing time t, integrated from the pre-fault SEP.
Vec fault_state_at(const StagedScenario& scenario, const ParameterSet& p, double t) {
    const SepSolution sep =
        find_sep(*scenario.model, Stage::PreFault, p, scenario.sep_guess());
    if (t <= 0.0) return sep.x_s;
    const Trajectory traj = integrate_stage(*scenario.model, Stage::FaultOn, sep.x_s,
                                            sep.y_s, p, t, scenario.settings.h,
                                            scenario.settings);
    if (traj.termination.kind != Termination::Kind::TimeLimit &&
        traj.termination.kind != Termination::Kind::Converged)
        throw NumericError("fault-on integration failed before the clearing time");
    return traj.samples.back().x;
}

} // namespace

CctResult find_cct_event(const StagedScenario& scenario, const ParameterSet& p) {
    const FaultShadowResult res =
        integrate_fault_with_shadow(scenario, p, scenario.settings.t_max,
                                    scenario.settings.h);
    if (!res.fold)
        throw NoFoldError("find_cct_event: no fold event within the horizon");

    CctResult out;
    out.t_cct = res.fold->t_fold;
    out.mechanism = Mechanism::FoldAtClearing;
    out.fold_event = *res.fold;
    out.method = CctMethod::EventDetection;
    out.delta_ref = res.delta_ref;

    // Phenomenon check: just below the event the clearing point must be
    // consistent, just above it must clear into collapse.
    const double eps = scenario.settings.fold_probe_eps;
    const bool below_ok =
        clearing_consistent(scenario, p, fault_state_at(scenario, p, out.t_cct - eps));
    const bool above_collapses =
        !clearing_consistent(scenario, p, fault_state_at(scenario, p, out.t_cct + eps));
    out.mechanism_mismatch = !(below_ok && above_collapses);
    return out;
}

CctResult find_cct_bisection(const StagedScenario& scenario, const ParameterSet& p,
                             double t_lo, double t_hi, double tol) {
    if (!(t_lo < t_hi) || tol <= 0.0)
        throw NoBracketError("find_cct_bisection: invalid interval");
    auto consistent_at = [&](double t) {
        return clearing_consistent(scenario, p, fault_state_at(scenario, p, t));
    };
    if (!consistent_at(t_lo))
        throw NoBracketError("find_cct_bisection: clearing at t_lo already collapses");
    if (consistent_at(t_hi))
        throw NoBracketError("find_cct_bisection: clearing at t_hi is still consistent");

    // Coarse monotonicity scan of the predicate before trusting bisection.
    {
        bool seen_false = false;
        for (int k = 1; k < 8; ++k) {
            const bool c = consistent_at(t_lo + k * (t_hi - t_lo) / 8.0);
            if (!c) seen_false = true;
            if (c && seen_false)
                throw NumericError("find_cct_bisection: collapse predicate is not "
                                   "monotone over the interval");
        }
    }

    double lo = t_lo, hi = t_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (consistent_at(mid))
            lo = mid;
        else
            hi = mid;
    }
    const double t_cct = 0.5 * (lo + hi);

    CctResult out;
    out.t_cct = t_cct;
    out.mechanism = Mechanism::FoldAtClearing;
    out.method = CctMethod::Bisection;

    // Describe the boundary point from the last consistent side.
    const SepSolution sep =
        find_sep(*scenario.model, Stage::PreFault, p, scenario.sep_guess());
    out.delta_ref = scenario.model->delta(Stage::PostFault, sep.x_s, sep.y_s, p);
    FoldEvent ev;
    ev.t_fold = t_cct;
    ev.x_cl = fault_state_at(scenario, p, lo);
    ev.y_post_cl = newton_algebraic(*scenario.model, Stage::PostFault, ev.x_cl, sep.y_s,
                                    p, scenario.settings.algebraic_tol);
    ev.delta_residual =
        scenario.model->delta(Stage::PostFault, ev.x_cl, ev.y_post_cl, p);
    ev.sigma_min =
        left_null_vector(scenario.model->dg_dy(Stage::PostFault, ev.x_cl, ev.y_post_cl, p),
                         std::numeric_limits<double>::infinity())
            .sigma_min;
    out.fold_event = ev;

    // Mechanism report: the unstable side must collapse at clearing.
    const PostFaultVerdict verdict =
        post_fault_stable(scenario, p, fault_state_at(scenario, p, hi),
                          scenario.settings.t_settle);
    out.mechanism_mismatch =
        !(verdict.kind == VerdictKind::FoldHit && verdict.t <= scenario.settings.h);
    return out;
}

double assemble_cct_sensitivity(const Vec& v_star, const Matrix& C1, const Vec& C2,
                                const Matrix& B1, const Vec& A1, const Vec& B2,
                                const Vec& B3) {
    const Vec dx = B1 * A1 + B3;
    const double num = dot(v_star, C2 + C1 * dx);
    const double den = dot(v_star, C1 * B2);
    return -num / den;
}

SensitivityBundle cct_sensitivity(const StagedScenario& scenario, const ParameterSet& p,
                                  int param_index, const CctResult& cct) {
    const DaeModel& model = *scenario.model;
    const FoldEvent& ev = cct.fold_event;

    SensitivityBundle b;
    b.param_index = param_index;

    const SepSolution sep = find_sep(model, Stage::PreFault, p, scenario.sep_guess());
    b.A1 = sep_sensitivity(model, p, param_index, sep);

    const VariationalHistory hist =
        integrate_variational(scenario, p, param_index, ev.t_fold, scenario.settings.h);
    const ClearingBlocks blocks = clearing_blocks(hist, ev.t_fold);
    b.B1 = blocks.B1;
    b.B2 = blocks.B2;
    b.B3 = blocks.B3;

    b.C1 = model.dg_dx(Stage::PostFault, ev.x_cl, ev.y_post_cl, p);
    b.C2 = model.dg_dp(Stage::PostFault, ev.x_cl, ev.y_post_cl, p, param_index);
    const double tol_sing = singularity_tol(scenario, cct.delta_ref);
    b.v_star = left_null_vector(model.dg_dy(Stage::PostFault, ev.x_cl, ev.y_post_cl, p),
                                std::max(1e-8, tol_sing))
                   .v_star;

    const double den = dot(b.v_star, b.C1 * b.B2);
    if (std::abs(den) < 1e-8)
        throw TransversalityError(
            "cct_sensitivity: v*^T C1 B2 vanishes, fault-on trajectory tangent to the fold");
    b.dcct_dp = assemble_cct_sensitivity(b.v_star, b.C1, b.C2, b.B1, b.A1, b.B2, b.B3);

    // Determinant-row first-order condition, evaluated with the
    // minimal-norm algebraic shift; reported, not enforced.
    {
        const Vec dx_total = b.B1 * b.A1 + b.B3 + b.dcct_dp * b.B2;
        const Matrix gy = model.dg_dy(Stage::PostFault, ev.x_cl, ev.y_post_cl, p);
        Vec dy(model.m(), 0.0);
        try {
            const Vec rhs_g = b.C1 * dx_total + b.C2;
            dy = lu_solve(gy, (-1.0) * rhs_g);
        } catch (const SingularMatrixError&) {
            // Exactly singular gy: the minimal-norm component in range is 0
            // for a one-dimensional algebraic space.
        }
        auto delta_at = [&](const Vec& x, const Vec& y, const ParameterSet& pp) {
            return model.delta(Stage::PostFault, x, y, pp);
        };
        double resid = 0.0;
        for (int j = 0; j < model.n(); ++j) {
            const double hs = 1e-6 * std::max(1.0, std::abs(ev.x_cl[j]));
            Vec xp = ev.x_cl, xm = ev.x_cl;
            xp[j] += hs;
            xm[j] -= hs;
            resid += (delta_at(xp, ev.y_post_cl, p) - delta_at(xm, ev.y_post_cl, p)) /
                     (2.0 * hs) * dx_total[j];
        }
        for (int j = 0; j < model.m(); ++j) {
            const double hs = 1e-6 * std::max(1.0, std::abs(ev.y_post_cl[j]));
            Vec yp = ev.y_post_cl, ym = ev.y_post_cl;
            yp[j] += hs;
            ym[j] -= hs;
            resid += (delta_at(ev.x_cl, yp, p) - delta_at(ev.x_cl, ym, p)) / (2.0 * hs) *
                     dy[j];
        }
        {
            const double hs = 1e-6 * std::max(1.0, std::abs(p[param_index]));
            ParameterSet pp = p, pm = p;
            pp[param_index] += hs;
            pm[param_index] -= hs;
            resid += (delta_at(ev.x_cl, ev.y_post_cl, pp) -
                      delta_at(ev.x_cl, ev.y_post_cl, pm)) /
                     (2.0 * hs);
        }
        b.delta_row_residual = resid;
    }
    return b;
}

std::vector<SweepRow> sweep(const StagedScenario& scenario, int param_index,
                            const std::vector<double>& values, int jobs) {
    std::vector<SweepRow> rows(values.size());
    const std::string name = ParameterSet::names()[param_index];

    auto run_row = [&](std::size_t idx) {
        SweepRow& row = rows[idx];
        row.param_name = name;
        row.value = values[idx];
        ParameterSet pv = scenario.params;
        pv[param_index] = values[idx];
        try {
            const CctResult cct = find_cct_event(scenario, pv);
            const SensitivityBundle bundle =
                cct_sensitivity(scenario, pv, param_index, cct);
            row.t_cct = cct.t_cct;
            row.dcct_dp = bundle.dcct_dp;
            row.method = cct.method;
            row.mechanism = to_string(cct.mechanism);
            if (cct.mechanism_mismatch) row.mechanism += "(mismatch)";
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1 || values.size() < 2) {
        for (std::size_t i = 0; i < values.size(); ++i) run_row(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int k = std::min<std::size_t>(jobs, values.size());
        pool.reserve(k);
        for (int w = 0; w < k; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < values.size();
                     i = next.fetch_add(1))
                    run_row(i);
            });
        for (auto& th : pool) th.join();
    }

    // Tangent-line predictions toward grid neighbors, in input order.
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].ok) continue;
        if (i > 0) rows[i].pred_prev = rows[i].t_cct + rows[i].dcct_dp * (values[i - 1] - values[i]);
        if (i + 1 < rows.size())
            rows[i].pred_next = rows[i].t_cct + rows[i].dcct_dp * (values[i + 1] - values[i]);
    }
    return rows;
}

} // namespace cctsens
