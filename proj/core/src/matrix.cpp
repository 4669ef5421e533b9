#include "cctsens/matrix.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

#include "cctsens/errors.hpp"

namespace cctsens {

namespace {
constexpr double kPivotTol = 1e-13;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> vals)
    : rows_(rows), cols_(cols), data_(vals) {
    assert(data_.size() == rows * cols);
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    assert(a.cols() == b.rows());
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) += b(i, j);
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
    return c;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) *= s;
    return c;
}

Vec operator*(const Matrix& a, const Vec& v) {
    assert(a.cols() == v.size());
    Vec r(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r[i] += a(i, j) * v[j];
    return r;
}

Vec operator+(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    Vec r = a;
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

Vec operator-(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    Vec r = a;
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    return r;
}

Vec operator*(double s, const Vec& v) {
    Vec r = v;
    for (double& x : r) x *= s;
    return r;
}

double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

double norm_inf(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

namespace {

// Partial-pivot LU in place. Returns the permutation sign, fills perm.
// Throws on a pivot below kPivotTol when `throw_on_singular`.
double lu_factor(Matrix& a, std::vector<std::size_t>& perm, bool throw_on_singular) {
    const std::size_t n = a.rows();
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double sign = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                piv = i;
            }
        }
        if (best < kPivotTol) {
            if (throw_on_singular)
                throw SingularMatrixError("lu_solve: pivot below 1e-13 (matrix singular or near-singular)");
            sign = 0.0;
            continue;
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(perm[k], perm[piv]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            a(i, k) /= a(k, k);
            const double lik = a(i, k);
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= lik * a(k, j);
        }
    }
    return sign;
}

} // namespace

Vec lu_solve(const Matrix& a, const Vec& b) {
    assert(a.rows() == a.cols() && a.rows() == b.size());
    const std::size_t n = a.rows();
    Matrix lu = a;
    std::vector<std::size_t> perm;
    lu_factor(lu, perm, /*throw_on_singular=*/true);
    Vec z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = b[perm[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) z[i] -= lu(i, j) * z[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) z[i] -= lu(i, j) * z[j];
        z[i] /= lu(i, i);
    }
    return z;
}

double determinant(const Matrix& a) {
    assert(a.rows() == a.cols());
    const std::size_t n = a.rows();
    switch (n) {
        case 0: return 1.0;
        case 1: return a(0, 0);
        case 2: return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        case 3:
            return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                   a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                   a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        default: break;
    }
    Matrix lu = a;
    std::vector<std::size_t> perm;
    const double sign = lu_factor(lu, perm, /*throw_on_singular=*/false);
    if (sign == 0.0) return 0.0;
    double det = sign;
    for (std::size_t i = 0; i < n; ++i) det *= lu(i, i);
    return det;
}

namespace {

// Minor of a with row i and column j removed.
Matrix minor_of(const Matrix& a, std::size_t i, std::size_t j) {
    Matrix m(a.rows() - 1, a.cols() - 1);
    for (std::size_t r = 0, mr = 0; r < a.rows(); ++r) {
        if (r == i) continue;
        for (std::size_t c = 0, mc = 0; c < a.cols(); ++c) {
            if (c == j) continue;
            m(mr, mc++) = a(r, c);
        }
        ++mr;
    }
    return m;
}

} // namespace

Matrix adjugate(const Matrix& a) {
    assert(a.rows() == a.cols());
    const std::size_t n = a.rows();
    if (n == 1) return Matrix(1, 1, {1.0});
    Matrix adj(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double cof = determinant(minor_of(a, i, j));
            adj(j, i) = (((i + j) % 2) ? -1.0 : 1.0) * cof; // transposed cofactor
        }
    return adj;
}

SvdNullResult left_null_vector(const Matrix& a, double tol) {
    assert(a.rows() == a.cols());
    const std::size_t n = a.rows();
    // One-sided Jacobi on B = A^T: B V = W with orthogonal columns, so
    // B = U' S V^T and A = V S U'^T. Columns of V are the left singular
    // vectors of A and survive even at sigma = 0.
    Matrix w = a.transposed();
    Matrix v = Matrix::identity(n);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    app += w(i, p) * w(i, p);
                    aqq += w(i, q) * w(i, q);
                    apq += w(i, p) * w(i, q);
                }
                off = std::max(off, std::abs(apq));
                if (std::abs(apq) < 1e-30) continue;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (off < 1e-15) break;
    }
    std::size_t best = 0;
    double sigma_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += w(i, j) * w(i, j);
        s = std::sqrt(s);
        if (s < sigma_min) {
            sigma_min = s;
            best = j;
        }
    }
    if (sigma_min > tol)
        throw NotSingularError("left_null_vector: smallest singular value exceeds tolerance",
                               sigma_min);
    Vec v_star(n);
    for (std::size_t i = 0; i < n; ++i) v_star[i] = v(i, best);
    const double nrm = norm2(v_star);
    for (double& x : v_star) x /= nrm;
    for (double x : v_star) {
        if (std::abs(x) > 1e-14) {
            if (x < 0.0)
                for (double& y : v_star) y = -y;
            break;
        }
    }
    return {std::move(v_star), sigma_min};
}

namespace {

// Characteristic polynomial coefficients by Faddeev-LeVerrier:
// p(s) = s^n + c[1] s^(n-1) + ... + c[n].
std::vector<double> char_poly(const Matrix& a) {
    const std::size_t n = a.rows();
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    Matrix m = Matrix::identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        m = a * m;
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) tr += m(i, i);
        c[k] = -tr / static_cast<double>(k);
        for (std::size_t i = 0; i < n; ++i) m(i, i) += c[k];
    }
    return c;
}

std::vector<std::complex<double>> durand_kerner(const std::vector<double>& c) {
    using C = std::complex<double>;
    const std::size_t deg = c.size() - 1;
    auto eval = [&](C z) {
        C r(0.0, 0.0);
        for (double ck : c) r = r * z + ck;
        return r;
    };
    double scale = 1.0;
    for (std::size_t k = 1; k <= deg; ++k)
        scale = std::max(scale, std::pow(std::abs(c[k]), 1.0 / static_cast<double>(k)));
    std::vector<C> roots(deg);
    const C seed(0.4, 0.9); // standard non-real starting ratio
    C z(1.0, 0.0);
    for (std::size_t i = 0; i < deg; ++i) {
        z *= seed;
        roots[i] = scale * z;
    }
    for (int iter = 0; iter < 200; ++iter) {
        double move = 0.0;
        for (std::size_t i = 0; i < deg; ++i) {
            C denom(1.0, 0.0);
            for (std::size_t j = 0; j < deg; ++j)
                if (j != i) denom *= roots[i] - roots[j];
            const C delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            move = std::max(move, std::abs(delta));
        }
        if (move < 1e-14 * std::max(1.0, scale)) break;
    }
    // Snap conjugate-pair imaginary dust on real matrices.
    for (auto& r : roots)
        if (std::abs(r.imag()) < 1e-10 * std::max(1.0, std::abs(r.real()))) r = C(r.real(), 0.0);
    return roots;
}

} // namespace

std::vector<std::complex<double>> eigenvalues_small(const Matrix& a) {
    assert(a.rows() == a.cols() && a.rows() <= 4);
    using C = std::complex<double>;
    const std::size_t n = a.rows();
    if (n == 0) return {};
    if (n == 1) return {C(a(0, 0), 0.0)};
    if (n == 2) {
        const double tr = a(0, 0) + a(1, 1);
        const double det = determinant(a);
        const double disc = tr * tr - 4.0 * det;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            return {C((tr + s) / 2.0, 0.0), C((tr - s) / 2.0, 0.0)};
        }
        const double s = std::sqrt(-disc);
        return {C(tr / 2.0, s / 2.0), C(tr / 2.0, -s / 2.0)};
    }
    return durand_kerner(char_poly(a));
}

} // namespace cctsens
