#include "cctsens/smib.hpp"

#include <cmath>

#include "cctsens/errors.hpp"

namespace cctsens {

namespace {

// Parameter vector order: X, Pm, E, M, Dl, Dg, Ql.
enum PIdx { pX = 0, pPm, pE, pM, pDl, pDg, pQl };

bool faulted(Stage s) { return s == Stage::FaultOn; }

} // namespace

SmibModel::SmibModel(const ParameterSet& params) { params.validate(); }

Vec SmibModel::f(Stage, const Vec& x, const Vec& y, const ParameterSet& p) const {
    // Electrical power transferred; identical expression in every stage,
    // the stages differ only in g.
    const double pe = (p.E * y[0] / p.X) * std::sin(x[0]);
    return {x[1] + (p.Pm - pe) / p.Dl, (p.Pm - pe - p.Dg * x[1]) / p.M};
}

Vec SmibModel::g(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const {
    if (faulted(s)) return {y[0]}; // solid three-phase bus fault: y = 0
    return {(p.E * y[0] / p.X) * std::cos(x[0]) - y[0] * y[0] / p.X - p.Ql};
}

Matrix SmibModel::df_dx(Stage, const Vec& x, const Vec& y, const ParameterSet& p) const {
    const double dpe_dx1 = (p.E * y[0] / p.X) * std::cos(x[0]);
    return Matrix(2, 2, {-dpe_dx1 / p.Dl, 1.0, -dpe_dx1 / p.M, -p.Dg / p.M});
}

Matrix SmibModel::df_dy(Stage, const Vec& x, const Vec&, const ParameterSet& p) const {
    const double dpe_dy = (p.E / p.X) * std::sin(x[0]);
    return Matrix(2, 1, {-dpe_dy / p.Dl, -dpe_dy / p.M});
}

Matrix SmibModel::dg_dx(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const {
    if (faulted(s)) return Matrix(1, 2);
    return Matrix(1, 2, {-(p.E * y[0] / p.X) * std::sin(x[0]), 0.0});
}

Matrix SmibModel::dg_dy(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const {
    if (faulted(s)) return Matrix(1, 1, {1.0});
    return Matrix(1, 1, {(p.E * std::cos(x[0]) - 2.0 * y[0]) / p.X});
}

Vec SmibModel::df_dp(Stage, const Vec& x, const Vec& y, const ParameterSet& p, int i) const {
    const double pe = (p.E * y[0] / p.X) * std::sin(x[0]);
    switch (i) {
        case pX: return {(pe / p.X) / p.Dl, (pe / p.X) / p.M};
        case pPm: return {1.0 / p.Dl, 1.0 / p.M};
        case pE: return {-(pe / p.E) / p.Dl, -(pe / p.E) / p.M};
        case pM: return {0.0, -(p.Pm - pe - p.Dg * x[1]) / (p.M * p.M)};
        case pDl: return {-(p.Pm - pe) / (p.Dl * p.Dl), 0.0};
        case pDg: return {0.0, -x[1] / p.M};
        case pQl: return {0.0, 0.0};
        default: break;
    }
    return {0.0, 0.0};
}

Vec SmibModel::dg_dp(Stage s, const Vec& x, const Vec& y, const ParameterSet& p, int i) const {
    if (faulted(s)) return {0.0}; // fault constraint is parameter-free
    const double c = std::cos(x[0]);
    switch (i) {
        case pX: return {(-(p.E * y[0] * c) + y[0] * y[0]) / (p.X * p.X)};
        case pE: return {(y[0] / p.X) * c};
        case pQl: return {-1.0};
        default: break;
    }
    return {0.0};
}

State SmibModel::sep_guess(const ParameterSet&) const {
    return {{0.0, 0.0}, {1.0}, Stage::PreFault};
}

std::shared_ptr<const DaeModel> smib_model(const ParameterSet& params) {
    return std::make_shared<SmibModel>(params);
}

FoldPoint smib_singular_locus(const ParameterSet& params) {
    params.validate();
    const double y_s = std::sqrt(params.Ql * params.X);
    const double c = 2.0 * y_s / params.E;
    if (c > 1.0)
        throw NoFoldError("smib_singular_locus: E^2 < 4*Ql*X, no fold on the real branch");
    return {std::acos(c), y_s};
}

} // namespace cctsens
