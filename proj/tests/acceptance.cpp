// Acceptance gate: one line per criterion, nonzero exit when any fails.

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "cctsens/cct.hpp"
#include "cctsens/errors.hpp"
#include "cctsens/geometry.hpp"
#include "cctsens/sensitivity.hpp"
#include "cctsens/smib.hpp"
#include "oracles.hpp"

using namespace cctsens;

namespace {

int failures = 0;

void report(int number, bool pass, const std::string& what) {
    std::printf("criterion %2d: %s  %s\n", number, pass ? "PASS" : "FAIL", what.c_str());
    if (!pass) ++failures;
}

StagedScenario base_scenario() {
    StagedScenario sc;
    sc.params = ParameterSet{};
    sc.model = smib_model(sc.params);
    return sc;
}

} // namespace

int main() {
    const StagedScenario sc = base_scenario();
    const ParameterSet p = sc.params;
    const DaeModel& model = *sc.model;

    // 1: operating-point oracle
    {
        const SepSolution sep = find_sep(model, Stage::PreFault, p, sc.sep_guess());
        const bool pass = std::abs(sep.x_s[0] - oracles::sep_angle(p)) <= 1e-6 &&
                          std::abs(sep.x_s[1]) <= 1e-6 &&
                          std::abs(sep.y_s[0] - oracles::sep_voltage(p)) <= 1e-6;
        report(1, pass, "equilibrium matches the quadratic closed form");
    }

    // 2: fold-locus oracle
    {
        const FoldPoint fp = smib_singular_locus(p);
        const bool pass = std::abs(fp.y_s - oracles::fold_voltage(p)) <= 1e-9 &&
                          std::abs(fp.x1_s - oracles::fold_angle(p)) <= 1e-9;
        report(2, pass, "fold locus matches y=sqrt(Ql X), cos x1 = 2y/E");
    }

    // 3: clearing-time oracle, both methods
    CctResult cct;
    {
        bool pass = false;
        try {
            cct = find_cct_event(sc, p);
            const CctResult bi = find_cct_bisection(sc, p, 0.0, 5.0, 1e-6);
            const double ref = oracles::cct_closed_form(p);
            pass = std::abs(cct.t_cct - ref) <= 1e-3 && std::abs(bi.t_cct - ref) <= 2e-3;
        } catch (const std::exception&) {
        }
        report(3, pass, "event detection and bisection hit the closed-form clearing time");
    }

    // 4: triple agreement of the sensitivity
    {
        bool pass = true;
        for (const char* name : {"E", "Pm"}) {
            const int idx = ParameterSet::index_of(name);
            const SensitivityBundle b = cct_sensitivity(sc, p, idx, cct);
            const double oracle = oracles::cct_sensitivity_closed_form(p, idx);
            const double d = 1e-3;
            ParameterSet pp = p, pm = p;
            pp[idx] += d;
            pm[idx] -= d;
            const double fd =
                (find_cct_event(sc, pp).t_cct - find_cct_event(sc, pm).t_cct) / (2 * d);
            pass = pass && std::abs(b.dcct_dp - oracle) / std::abs(oracle) <= 0.02 &&
                   std::abs(b.dcct_dp - fd) / std::abs(fd) <= 0.01;
        }
        report(4, pass, "formula vs implicit oracle (2%) vs finite difference (1%)");
    }

    // 5: tangency — prediction error drops >= 3.5x when spacing halves
    {
        auto t_at = [&](int idx, double value) {
            ParameterSet q = p;
            q[idx] = value;
            return find_cct_event(sc, q).t_cct;
        };
        auto pred_error = [&](int idx, double value, double d) {
            ParameterSet q = p;
            q[idx] = value;
            const CctResult c = find_cct_event(sc, q);
            const SensitivityBundle b = cct_sensitivity(sc, q, idx, c);
            return std::abs(t_at(idx, value + d) - (c.t_cct + b.dcct_dp * d));
        };
        const int iE = ParameterSet::index_of("E");
        const int iPm = ParameterSet::index_of("Pm");
        bool pass = true;
        for (double e0 : {0.9, 1.05, 1.2})
            pass = pass && pred_error(iE, e0, 0.05) / pred_error(iE, e0, 0.025) >= 3.5;
        for (double pm0 : {0.4, 0.5, 0.6})
            pass = pass && pred_error(iPm, pm0, 0.05) / pred_error(iPm, pm0, 0.025) >= 3.5;
        report(5, pass, "tangent predictions tighten >= 3.5x under halved spacing");
    }

    // 6: monotone trends over the reference grids
    {
        std::vector<double> e_grid, pm_grid;
        for (double v = 0.9; v <= 1.2001; v += 0.05) e_grid.push_back(v);
        for (double v = 0.4; v <= 0.6001; v += 0.05) pm_grid.push_back(v);
        const auto er = sweep(sc, ParameterSet::index_of("E"), e_grid, 2);
        const auto pr = sweep(sc, ParameterSet::index_of("Pm"), pm_grid, 2);
        bool pass = true;
        for (std::size_t i = 0; i + 1 < er.size(); ++i)
            pass = pass && er[i].ok && er[i + 1].ok && er[i].t_cct < er[i + 1].t_cct;
        for (std::size_t i = 0; i + 1 < pr.size(); ++i)
            pass = pass && pr[i].ok && pr[i + 1].ok && pr[i].t_cct > pr[i + 1].t_cct;
        report(6, pass, "clearing time increases in E, decreases in Pm");
    }

    // 7: variational blocks vs finite differences and the closed-form flow map
    {
        const int idx = ParameterSet::index_of("E");
        const double t_cl = 1.0;
        const VariationalHistory hist = integrate_variational(sc, p, idx, t_cl, sc.settings.h);
        const ClearingBlocks blocks = clearing_blocks(hist, t_cl);
        const double e = std::exp(-t_cl);
        bool pass = std::abs(blocks.B1(0, 0) - 1.0) <= 1e-6 &&
                    std::abs(blocks.B1(0, 1) - (1.0 - e)) <= 1e-6 &&
                    std::abs(blocks.B1(1, 0)) <= 1e-6 && std::abs(blocks.B1(1, 1) - e) <= 1e-6;

        const SepSolution sep = find_sep(model, Stage::PreFault, p, sc.sep_guess());
        auto final_x = [&](const Vec& x0, const ParameterSet& q) {
            return integrate_stage(model, Stage::FaultOn, x0, sep.y_s, q, t_cl,
                                   sc.settings.h, sc.settings)
                .samples.back()
                .x;
        };
        for (int j = 0; j < 2 && pass; ++j) {
            const double h = 1e-6;
            Vec xp = sep.x_s, xm = sep.x_s;
            xp[j] += h;
            xm[j] -= h;
            const Vec fp_ = final_x(xp, p), fm = final_x(xm, p);
            for (int i = 0; i < 2; ++i) {
                const double fd = (fp_[i] - fm[i]) / (2 * h);
                pass = pass && std::abs(blocks.B1(i, j) - fd) <=
                                   1e-4 * std::max(1.0, std::abs(fd));
            }
        }
        {
            const double h = 1e-6;
            ParameterSet pp = p, pm = p;
            pp[idx] += h;
            pm[idx] -= h;
            const Vec fp_ = final_x(sep.x_s, pp), fm = final_x(sep.x_s, pm);
            for (int i = 0; i < 2; ++i) {
                const double fd = (fp_[i] - fm[i]) / (2 * h);
                pass = pass &&
                       std::abs(blocks.B3[i] - fd) <= 1e-4 * std::max(1.0, std::abs(fd));
            }
        }
        report(7, pass, "B1/B3 match finite differences and the closed-form flow map");
    }

    // 8: post-fault algebraic sensitivity blows up, then is withheld
    {
        const int idx = ParameterSet::index_of("E");
        const double t_fold = cct.fold_event.t_fold;
        const double t1 = t_fold - 1e-9;
        const double h = t1 / std::ceil(t1 / 1e-3);
        const VariationalHistory hist = integrate_variational(sc, p, idx, t1 + 2.0 * h, h);
        bool pass = !hist.samples.empty() && !hist.samples.back().dypost_dp.has_value() &&
                    hist.samples.front().dypost_dp.has_value();
        if (pass) {
            const double init = std::abs((*hist.samples.front().dypost_dp)[0]);
            double peak = 0.0;
            for (const auto& s : hist.samples)
                if (s.dypost_dp) peak = std::max(peak, std::abs((*s.dypost_dp)[0]));
            pass = init > 0.0 && peak >= 1e3 * init;
        }
        report(8, pass, "shadow-branch sensitivity grows 1000x, absent inside the window");
    }

    // 9: left null vector contract and scale invariance
    {
        const SensitivityBundle b = cct_sensitivity(sc, p, ParameterSet::index_of("E"), cct);
        const Matrix gy =
            model.dg_dy(Stage::PostFault, cct.fold_event.x_cl, cct.fold_event.y_post_cl, p);
        double res = 0.0;
        for (std::size_t j = 0; j < gy.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < gy.rows(); ++i) acc += b.v_star[i] * gy(i, j);
            res = std::max(res, std::abs(acc));
        }
        const double v1 = assemble_cct_sensitivity(b.v_star, b.C1, b.C2, b.B1, b.A1, b.B2, b.B3);
        const double v2 = assemble_cct_sensitivity(-41.5 * b.v_star, b.C1, b.C2, b.B1,
                                                   b.A1, b.B2, b.B3);
        const bool pass = res <= 1e-8 && std::abs(v2 - v1) / std::abs(v1) <= 1e-14;
        report(9, pass, "||v* dg/dy|| <= 1e-8 and rescaling v* leaves the result fixed");
    }

    // 10: geometry suite
    {
        bool pass = true;
        std::mt19937 rng(99);
        std::uniform_real_distribution<double> ux(-1.0, 1.0), uy(0.3, 1.2);
        int checked = 0;
        while (checked < 100 && pass) {
            const Vec x{ux(rng), ux(rng)};
            const Vec y{uy(rng)};
            const double delta = model.delta(Stage::PostFault, x, y, p);
            if (std::abs(delta) < 0.05) continue;
            ++checked;
            const TransformedField tf = transformed_field(model, Stage::PostFault, x, y, p);
            const Vec fv = model.f(Stage::PostFault, x, y, p);
            const Vec ydot = lu_solve(model.dg_dy(Stage::PostFault, x, y, p),
                                      (-1.0) * (model.dg_dx(Stage::PostFault, x, y, p) * fv));
            for (int i = 0; i < 2; ++i)
                pass = pass && std::abs(tf.xdot[i] - delta * fv[i]) <=
                                   1e-8 * std::max(1.0, std::abs(delta * fv[i]));
            pass = pass && std::abs(tf.ydot[0] - delta * ydot[0]) <=
                               1e-8 * std::max(1.0, std::abs(delta * ydot[0]));
        }

        const FoldPoint fp = smib_singular_locus(p);
        const double pe = (p.E * fp.y_s / p.X) * std::sin(fp.x1_s);
        const double x2_star = -(p.Pm - pe) / p.Dl;
        const auto c = classify_singular_point(model, Stage::PostFault, {fp.x1_s, x2_star},
                                               {fp.y_s}, p);
        pass = pass && c.category == PointCategory::PseudoEP &&
               c.pseudo_type == PseudoType::Sink;

        const State seed{{fp.x1_s, 0.0}, {fp.y_s}, Stage::PostFault};
        const auto pts = trace_singular_set(model, Stage::PostFault, p, seed, 0.1, 15);
        for (const auto& st : pts)
            pass = pass && std::abs(st.x[0] - fp.x1_s) <= 1e-9 &&
                   std::abs(st.y[0] - fp.y_s) <= 1e-9;
        report(10, pass, "field parallelism, pseudo-equilibrium, and x2-line trace");
    }

    // 11: kernel properties
    {
        bool pass = true;
        std::mt19937 rng(555);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int trial = 0; trial < 100 && pass; ++trial) {
            const std::size_t k = 1 + trial % 4;
            Matrix a(k, k);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) a(i, j) = u(rng);
            const Matrix prod = adjugate(a) * a;
            const double d = determinant(a);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    pass = pass && std::abs(prod(i, j) - (i == j ? d : 0.0)) <= 1e-10;
        }

        auto integrate = [](double h) {
            Vec x{1.0};
            double t = 0.0;
            auto deriv = [](double, const Vec& v) { return Vec{-v[0] * v[0]}; };
            while (t < 1.0 - 1e-12) {
                x = rk4_step(deriv, t, x, h);
                t += h;
            }
            return std::abs(x[0] - 0.5);
        };
        pass = pass && integrate(0.05) / integrate(0.025) >= 15.0;

        std::uniform_real_distribution<double> ux(-1.0, 1.0);
        for (Stage s : {Stage::PreFault, Stage::FaultOn, Stage::PostFault})
            for (int trial = 0; trial < 5 && pass; ++trial) {
                const Vec x{ux(rng), ux(rng)};
                const Vec y{0.4 + 0.5 * std::abs(ux(rng))};
                pass = pass && max_jacobian_fd_error(model, s, x, y, p) <= 1e-5;
            }
        report(11, pass, "adjugate identity, RK4 order, analytic vs FD jacobians");
    }

    return failures == 0 ? 0 : 1;
}
