#include "cctsens/model.hpp"

#include <cmath>
#include <stdexcept>

namespace cctsens {

const char* to_string(Stage s) {
    switch (s) {
        case Stage::PreFault: return "pre";
        case Stage::FaultOn: return "fault";
        case Stage::PostFault: return "post";
    }
    return "?";
}

const std::array<std::string, ParameterSet::count>& ParameterSet::names() {
    static const std::array<std::string, count> n = {"X", "Pm", "E", "M", "Dl", "Dg", "Ql"};
    return n;
}

int ParameterSet::index_of(const std::string& name) {
    const auto& n = names();
    for (int i = 0; i < count; ++i)
        if (n[i] == name) return i;
    return -1;
}

double ParameterSet::operator[](int i) const {
    return const_cast<ParameterSet&>(*this)[i];
}

double& ParameterSet::operator[](int i) {
    switch (i) {
        case 0: return X;
        case 1: return Pm;
        case 2: return E;
        case 3: return M;
        case 4: return Dl;
        case 5: return Dg;
        case 6: return Ql;
        default: throw std::out_of_range("ParameterSet index out of range");
    }
}

Vec ParameterSet::as_vector() const {
    Vec v(count);
    for (int i = 0; i < count; ++i) v[i] = (*this)[i];
    return v;
}

void ParameterSet::validate() const {
    for (int i = 0; i < count; ++i)
        if (!std::isfinite((*this)[i]))
            throw std::invalid_argument("parameter " + names()[i] + " is not finite");
    if (X <= 0.0) throw std::invalid_argument("X must be positive");
    if (M <= 0.0) throw std::invalid_argument("M must be positive");
    if (E <= 0.0) throw std::invalid_argument("E must be positive");
    if (Ql < 0.0) throw std::invalid_argument("Ql must be nonnegative");
}

double DaeModel::delta(Stage s, const Vec& x, const Vec& y, const ParameterSet& p) const {
    return determinant(dg_dy(s, x, y, p));
}

namespace {

double rel_err(double analytic, double fd, double scale) {
    return std::abs(analytic - fd) / std::max({1.0, std::abs(analytic), scale});
}

} // namespace

double max_jacobian_fd_error(const DaeModel& model, Stage s, const Vec& x, const Vec& y,
                             const ParameterSet& p) {
    const int n = model.n(), m = model.m();
    double worst = 0.0;
    auto step = [](double v) { return 1e-6 * std::max(1.0, std::abs(v)); };

    const Matrix fx = model.df_dx(s, x, y, p);
    const Matrix fy = model.df_dy(s, x, y, p);
    const Matrix gx = model.dg_dx(s, x, y, p);
    const Matrix gy = model.dg_dy(s, x, y, p);

    for (int j = 0; j < n; ++j) {
        const double h = step(x[j]);
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const Vec fp = model.f(s, xp, y, p), fm = model.f(s, xm, y, p);
        const Vec gp = model.g(s, xp, y, p), gm = model.g(s, xm, y, p);
        for (int i = 0; i < n; ++i)
            worst = std::max(worst, rel_err(fx(i, j), (fp[i] - fm[i]) / (2 * h), 0.0));
        for (int i = 0; i < m; ++i)
            worst = std::max(worst, rel_err(gx(i, j), (gp[i] - gm[i]) / (2 * h), 0.0));
    }
    for (int j = 0; j < m; ++j) {
        const double h = step(y[j]);
        Vec yp = y, ym = y;
        yp[j] += h;
        ym[j] -= h;
        const Vec fp = model.f(s, x, yp, p), fm = model.f(s, x, ym, p);
        const Vec gp = model.g(s, x, yp, p), gm = model.g(s, x, ym, p);
        for (int i = 0; i < n; ++i)
            worst = std::max(worst, rel_err(fy(i, j), (fp[i] - fm[i]) / (2 * h), 0.0));
        for (int i = 0; i < m; ++i)
            worst = std::max(worst, rel_err(gy(i, j), (gp[i] - gm[i]) / (2 * h), 0.0));
    }
    for (int k = 0; k < model.np(); ++k) {
        const double h = step(p[k]);
        ParameterSet pp = p, pm = p;
        pp[k] += h;
        pm[k] -= h;
        const Vec fpk = model.df_dp(s, x, y, p, k);
        const Vec gpk = model.dg_dp(s, x, y, p, k);
        const Vec fp = model.f(s, x, y, pp), fm = model.f(s, x, y, pm);
        const Vec gp = model.g(s, x, y, pp), gm = model.g(s, x, y, pm);
        for (int i = 0; i < model.n(); ++i)
            worst = std::max(worst, rel_err(fpk[i], (fp[i] - fm[i]) / (2 * h), 0.0));
        for (int i = 0; i < m; ++i)
            worst = std::max(worst, rel_err(gpk[i], (gp[i] - gm[i]) / (2 * h), 0.0));
    }
    return worst;
}

} // namespace cctsens
