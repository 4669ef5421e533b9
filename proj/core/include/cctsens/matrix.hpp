#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace cctsens {

using Vec = std::vector<double>;

/// Dense row-major matrix. Everything in this toolkit is small (the
/// Jacobian blocks of a staged DAE model), so no view machinery.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> vals);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }

    Matrix transposed() const;
    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vec operator*(const Matrix& a, const Vec& v);

// Vector helpers.
Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, const Vec& v);
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
double norm_inf(const Vec& v);

/// Solves A z = b by partial-pivot LU. Throws SingularMatrixError when a
/// pivot magnitude drops below 1e-13; catch it near the singular surface.
Vec lu_solve(const Matrix& a, const Vec& b);

/// det(A): closed forms up to 3x3, LU beyond.
double determinant(const Matrix& a);

/// adj(A), satisfying adj(A)*A = det(A)*I, defined for singular A too.
/// The 1x1 adjugate is [1] by convention.
Matrix adjugate(const Matrix& a);

struct SvdNullResult {
    Vec v_star;       ///< unit left null direction, first nonzero component positive
    double sigma_min; ///< smallest singular value
};

/// Left null vector of a square matrix via one-sided Jacobi SVD.
/// Throws NotSingularError if sigma_min exceeds `tol`.
SvdNullResult left_null_vector(const Matrix& a, double tol = 1e-8);

/// Eigenvalues of a k x k matrix, k <= 4. Closed forms for k <= 2,
/// characteristic-polynomial iteration above.
std::vector<std::complex<double>> eigenvalues_small(const Matrix& a);

} // namespace cctsens
