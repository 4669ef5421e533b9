#include "cctsens/roots.hpp"

#include <cmath>

#include "cctsens/errors.hpp"

namespace cctsens {

double bracketed_root(const std::function<double(double)>& fn, double lo, double hi,
                      double tol) {
    double flo = fn(lo);
    double fhi = fn(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw NoBracketError("bracketed_root: fn(lo) and fn(hi) have the same sign");
    while (hi - lo > tol) {
        // Secant proposal, clamped well inside the bracket; midpoint fallback.
        double t = lo - flo * (hi - lo) / (fhi - flo);
        const double margin = 0.01 * (hi - lo);
        if (!(t > lo + margin && t < hi - margin)) t = 0.5 * (lo + hi);
        const double ft = fn(t);
        if (ft == 0.0) return t;
        if (flo * ft < 0.0) {
            hi = t;
            fhi = ft;
        } else {
            lo = t;
            flo = ft;
        }
    }
    return 0.5 * (lo + hi);
}

Vec rk4_step(const std::function<Vec(double, const Vec&)>& deriv, double t,
             const Vec& x, double h) {
    auto checked = [&](double tt, const Vec& xx) {
        Vec d = deriv(tt, xx);
        for (double v : d)
            if (!std::isfinite(v)) throw NumericError("rk4_step: non-finite derivative");
        return d;
    };
    const Vec k1 = checked(t, x);
    const Vec k2 = checked(t + h / 2.0, x + (h / 2.0) * k1);
    const Vec k3 = checked(t + h / 2.0, x + (h / 2.0) * k2);
    const Vec k4 = checked(t + h, x + h * k3);
    Vec out = x;
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

} // namespace cctsens
