#include "cctsens/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "cctsens/errors.hpp"

namespace cctsens {

const char* to_string(PointCategory c) {
    switch (c) {
        case PointCategory::Regular: return "regular";
        case PointCategory::Singular: return "singular";
        case PointCategory::SemiSingular: return "semi_singular";
        case PointCategory::PseudoEP: return "pseudo_ep";
    }
    return "?";
}

const char* to_string(PseudoType t) {
    switch (t) {
        case PseudoType::Source: return "source";
        case PseudoType::Sink: return "sink";
        case PseudoType::Saddle: return "saddle";
        case PseudoType::Unclassifiable: return "unclassifiable";
    }
    return "?";
}

TransformedField transformed_field(const DaeModel& model, Stage stage, const Vec& x,
                                   const Vec& y, const ParameterSet& p) {
    TransformedField out;
    const Vec fv = model.f(stage, x, y, p);
    const Matrix gy = model.dg_dy(stage, x, y, p);
    const double delta = determinant(gy);
    out.xdot = delta * fv;
    out.ydot = (-1.0) * (adjugate(gy) * (model.dg_dx(stage, x, y, p) * fv));
    return out;
}

namespace {

// Residual [g; delta] and its Jacobian over z = (x, y); the delta row is
// finite-differenced.
struct SurfaceSystem {
    const DaeModel& model;
    Stage stage;
    const ParameterSet& p;

    int n() const { return model.n(); }
    int m() const { return model.m(); }
    int dim() const { return n() + m(); }

    void split(const Vec& z, Vec& x, Vec& y) const {
        x.assign(z.begin(), z.begin() + n());
        y.assign(z.begin() + n(), z.end());
    }

    Vec residual(const Vec& z) const {
        Vec x, y;
        split(z, x, y);
        Vec r = model.g(stage, x, y, p);
        r.push_back(model.delta(stage, x, y, p));
        return r;
    }

    Matrix jacobian(const Vec& z) const {
        Vec x, y;
        split(z, x, y);
        const Matrix gx = model.dg_dx(stage, x, y, p);
        const Matrix gy = model.dg_dy(stage, x, y, p);
        Matrix j(m() + 1, dim());
        for (int i = 0; i < m(); ++i) {
            for (int k = 0; k < n(); ++k) j(i, k) = gx(i, k);
            for (int k = 0; k < m(); ++k) j(i, n() + k) = gy(i, k);
        }
        for (int k = 0; k < dim(); ++k) {
            const double hs = 1e-6 * std::max(1.0, std::abs(z[k]));
            Vec zp = z, zm = z;
            zp[k] += hs;
            zm[k] -= hs;
            Vec xp, yp, xm, ym;
            split(zp, xp, yp);
            split(zm, xm, ym);
            j(m(), k) = (model.delta(stage, xp, yp, p) - model.delta(stage, xm, ym, p)) /
                        (2.0 * hs);
        }
        return j;
    }

    // Minimal-norm Gauss-Newton correction z -= J^T (J J^T)^{-1} r.
    bool project(Vec& z, int iters, double tol) const {
        for (int it = 0; it < iters; ++it) {
            const Vec r = residual(z);
            if (norm_inf(r) <= tol) return true;
            const Matrix j = jacobian(z);
            const Vec w = lu_solve(j * j.transposed(), r);
            Vec dz(dim(), 0.0);
            for (int c = 0; c < dim(); ++c)
                for (std::size_t q = 0; q < j.rows(); ++q) dz[c] += j(q, c) * w[q];
            z = z - dz;
        }
        return norm_inf(residual(z)) <= tol;
    }
};

} // namespace

SingularPointClass classify_singular_point(const DaeModel& model, Stage stage, const Vec& x,
                                           const Vec& y, const ParameterSet& p,
                                           const ClassifyOptions& opts) {
    SingularPointClass out;
    out.x = x;
    out.y = y;

    // Pull the query point onto the constraint surface (full (x, y) space,
    // minimal-norm step) so the tests below see g = 0.
    {
        Vec z = x;
        z.insert(z.end(), y.begin(), y.end());
        auto residual = [&](const Vec& zz) {
            Vec xx(zz.begin(), zz.begin() + model.n());
            Vec yy(zz.begin() + model.n(), zz.end());
            return model.g(stage, xx, yy, p);
        };
        for (int it = 0; it < 5 && norm_inf(residual(z)) > 1e-12; ++it) {
            Vec xx(z.begin(), z.begin() + model.n());
            Vec yy(z.begin() + model.n(), z.end());
            const Matrix gx = model.dg_dx(stage, xx, yy, p);
            const Matrix gy = model.dg_dy(stage, xx, yy, p);
            Matrix j(model.m(), model.n() + model.m());
            for (int i = 0; i < model.m(); ++i) {
                for (int k = 0; k < model.n(); ++k) j(i, k) = gx(i, k);
                for (int k = 0; k < model.m(); ++k) j(i, model.n() + k) = gy(i, k);
            }
            const Vec w = lu_solve(j * j.transposed(), residual(z));
            for (std::size_t c = 0; c < z.size(); ++c) {
                double dz = 0.0;
                for (std::size_t q = 0; q < j.rows(); ++q) dz += j(q, c) * w[q];
                z[c] -= dz;
            }
        }
        out.x.assign(z.begin(), z.begin() + model.n());
        out.y.assign(z.begin() + model.n(), z.end());
    }

    const Matrix gy = model.dg_dy(stage, out.x, out.y, p);
    out.delta = determinant(gy);
    const Vec fv = model.f(stage, out.x, out.y, p);
    out.kappa = adjugate(gy) * (model.dg_dx(stage, out.x, out.y, p) * fv);

    // Tangency monitor: directional derivative of delta along kappa.
    {
        double graze = 0.0;
        for (int j = 0; j < model.m(); ++j) {
            const double hs = 1e-6 * std::max(1.0, std::abs(out.y[j]));
            Vec yp = out.y, ym = out.y;
            yp[j] += hs;
            ym[j] -= hs;
            graze += (model.delta(stage, out.x, yp, p) - model.delta(stage, out.x, ym, p)) /
                     (2.0 * hs) * out.kappa[j];
        }
        out.graze = graze;
    }

    out.singular = std::abs(out.delta) <= opts.delta_tol;
    out.semi_singular = out.singular && std::abs(out.graze) <= opts.graze_tol;
    out.pseudo_ep = out.singular && norm_inf(out.kappa) <= opts.kappa_tol;
    out.category = out.pseudo_ep     ? PointCategory::PseudoEP
                   : out.semi_singular ? PointCategory::SemiSingular
                   : out.singular      ? PointCategory::Singular
                                       : PointCategory::Regular;

    if (out.pseudo_ep) {
        // Linearize the rescaled field in the full (x, y) space; one
        // eigenvalue per algebraic constraint sits near zero (surface
        // direction) and the remaining pair types the point.
        const int dim = model.n() + model.m();
        Vec z = out.x;
        z.insert(z.end(), out.y.begin(), out.y.end());
        auto field = [&](const Vec& zz) {
            Vec xx(zz.begin(), zz.begin() + model.n());
            Vec yy(zz.begin() + model.n(), zz.end());
            const TransformedField tf = transformed_field(model, stage, xx, yy, p);
            Vec r = tf.xdot;
            r.insert(r.end(), tf.ydot.begin(), tf.ydot.end());
            return r;
        };
        Matrix jac(dim, dim);
        for (int k = 0; k < dim; ++k) {
            const double hs = 1e-6 * std::max(1.0, std::abs(z[k]));
            Vec zp = z, zm = z;
            zp[k] += hs;
            zm[k] -= hs;
            const Vec rp = field(zp), rm = field(zm);
            for (int i = 0; i < dim; ++i) jac(i, k) = (rp[i] - rm[i]) / (2.0 * hs);
        }
        for (const auto& ev : eigenvalues_small(jac))
            if (std::abs(ev) >= opts.eig_center_cutoff) out.nonzero_eigs.push_back(ev);

        if (out.nonzero_eigs.size() != 2) {
            out.pseudo_type = PseudoType::Unclassifiable;
        } else {
            const double r1 = out.nonzero_eigs[0].real();
            const double r2 = out.nonzero_eigs[1].real();
            if (r1 < 0.0 && r2 < 0.0)
                out.pseudo_type = PseudoType::Sink;
            else if (r1 > 0.0 && r2 > 0.0)
                out.pseudo_type = PseudoType::Source;
            else if (r1 * r2 < 0.0)
                out.pseudo_type = PseudoType::Saddle;
            else
                out.pseudo_type = PseudoType::Unclassifiable;
        }
    }
    return out;
}

std::vector<State> trace_singular_set(const DaeModel& model, Stage stage,
                                      const ParameterSet& p, const State& seed,
                                      double arc_step, int count) {
    if (model.n() + model.m() != model.m() + 2)
        throw std::invalid_argument(
            "trace_singular_set: the singular set is a curve only for two dynamic states");

    const SurfaceSystem sys{model, stage, p};
    const int dim = sys.dim();

    Vec z = seed.x;
    z.insert(z.end(), seed.y.begin(), seed.y.end());
    if (!sys.project(z, 20, 1e-11))
        throw ConvergenceError("trace_singular_set: seed did not project onto the set");

    // Tangent of the (m+1) x (m+2) Jacobian by cofactor expansion.
    auto tangent_at = [&](const Vec& zz) {
        const Matrix j = sys.jacobian(zz);
        Vec t(dim, 0.0);
        for (int drop = 0; drop < dim; ++drop) {
            Matrix sub(dim - 1, dim - 1);
            for (int r = 0; r < dim - 1; ++r) {
                int cc = 0;
                for (int c = 0; c < dim; ++c) {
                    if (c == drop) continue;
                    sub(r, cc++) = j(r, c);
                }
            }
            t[drop] = ((drop % 2) ? -1.0 : 1.0) * determinant(sub);
        }
        const double nrm = norm2(t);
        if (nrm < 1e-14)
            throw ContinuationStallError("trace_singular_set: rank-deficient tangent");
        return (1.0 / nrm) * t;
    };

    std::vector<State> out;
    auto emit = [&](const Vec& zz) {
        State s;
        s.stage = stage;
        s.x.assign(zz.begin(), zz.begin() + model.n());
        s.y.assign(zz.begin() + model.n(), zz.end());
        out.push_back(std::move(s));
    };
    emit(z);

    Vec t_prev = tangent_at(z);
    if (arc_step < 0.0) t_prev = (-1.0) * t_prev;
    const double step_mag = std::abs(arc_step);
    double step = step_mag;
    int rejections = 0;

    while ((int)out.size() < count) {
        Vec t = tangent_at(z);
        if (dot(t, t_prev) < 0.0) t = (-1.0) * t;

        const Vec z_pred = z + step * t;
        Vec zc = z_pred;
        bool ok = false;
        for (int it = 0; it < 25; ++it) {
            Vec r = sys.residual(zc);
            r.push_back(dot(t, zc - z_pred));
            if (norm_inf(r) <= 1e-10) {
                ok = true;
                break;
            }
            const Matrix j = sys.jacobian(zc);
            Matrix aug(dim, dim);
            for (std::size_t rr = 0; rr < j.rows(); ++rr)
                for (int c = 0; c < dim; ++c) aug(rr, c) = j(rr, c);
            for (int c = 0; c < dim; ++c) aug(dim - 1, c) = t[c];
            Vec dz;
            try {
                dz = lu_solve(aug, r);
            } catch (const SingularMatrixError&) {
                break;
            }
            zc = zc - dz;
        }
        if (ok && norm_inf(sys.residual(zc)) <= 1e-9) {
            z = zc;
            t_prev = t;
            emit(z);
            rejections = 0;
            step = std::min(step_mag, 1.5 * step);
        } else {
            if (++rejections >= 10)
                throw ContinuationStallError(
                    "trace_singular_set: ten consecutive step rejections");
            step *= 0.5;
        }
    }
    return out;
}

} // namespace cctsens
