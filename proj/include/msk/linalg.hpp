#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "msk/errors.hpp"

namespace msk {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double max_abs(const Vec& a);

// Dense row-major matrix; everything here targets small n (catalog work stays
// at n <= 12).
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : r_(rows), c_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return r_; }
    int cols() const { return c_; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * c_ + j]; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * c_ + j]; }

    Matrix transposed() const;
    Matrix operator*(const Matrix& o) const;
    Matrix operator+(const Matrix& o) const;
    Matrix operator-(const Matrix& o) const;
    Matrix scaled(double c) const;
    Vec apply(const Vec& x) const;  // y = A x
    double trace() const;
    double max_abs() const;

  private:
    int r_ = 0, c_ = 0;
    std::vector<double> a_;
};

// Symmetric n x n matrix. Construction validates the symmetry tolerance
// |a_ij - a_ji| <= 1e-12 (1 + max|a|) and finiteness, then stores the
// symmetrized entries.
class SymMatrix {
  public:
    SymMatrix() = default;
    explicit SymMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n, 0.0) {}
    SymMatrix(int n, const std::vector<double>& entries);  // validates

    static SymMatrix identity(int n);
    static SymMatrix diagonal(const Vec& d);
    // Symmetrizes without tolerance check (for internal results known symmetric
    // up to roundoff).
    static SymMatrix symmetrize(const Matrix& m);

    int dim() const { return n_; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
    double& at(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    void set(int i, int j, double v) {
        a_[static_cast<size_t>(i) * n_ + j] = v;
        a_[static_cast<size_t>(j) * n_ + i] = v;
    }

    Matrix mat() const;
    SymMatrix operator+(const SymMatrix& o) const;
    SymMatrix operator-(const SymMatrix& o) const;
    SymMatrix scaled(double c) const;
    double trace() const;
    double max_abs() const;
    double frobenius() const;

  private:
    int n_ = 0;
    std::vector<double> a_;
};

struct EigenSym {
    Vec values;      // ascending
    Matrix vectors;  // columns are eigenvectors, matching order
};

// Cyclic Jacobi rotations: off-diagonal threshold 1e-13 * ||A||_F, at most 100
// sweeps. Suited to the small dense symmetric matrices this library works with.
EigenSym eigen_sym(const SymMatrix& a);

// Smallest eigenvalue only (same Jacobi path).
double min_eigenvalue(const SymMatrix& a);

// g^{-1/2} for SPD g via the Jacobi eigendecomposition.
SymMatrix sym_inv_sqrt(const SymMatrix& g);

// Gauss-Jordan with partial pivoting; throws validation_error when singular.
Matrix inverse(const Matrix& m);

double determinant(Matrix m);  // LU with partial pivoting

// Dense 3- and 4-index arrays (small dims).
class Tensor3 {
  public:
    Tensor3() = default;
    Tensor3(int d0, int d1, int d2)
        : d_{d0, d1, d2}, a_(static_cast<size_t>(d0) * d1 * d2, 0.0) {}
    double operator()(int i, int j, int k) const { return a_[idx(i, j, k)]; }
    double& operator()(int i, int j, int k) { return a_[idx(i, j, k)]; }
    int dim(int axis) const { return d_[axis]; }
    double max_abs() const;

  private:
    size_t idx(int i, int j, int k) const {
        return (static_cast<size_t>(i) * d_[1] + j) * d_[2] + k;
    }
    int d_[3] = {0, 0, 0};
    std::vector<double> a_;
};

class Tensor4 {
  public:
    Tensor4() = default;
    Tensor4(int d0, int d1, int d2, int d3)
        : d_{d0, d1, d2, d3}, a_(static_cast<size_t>(d0) * d1 * d2 * d3, 0.0) {}
    double operator()(int i, int j, int k, int l) const { return a_[idx(i, j, k, l)]; }
    double& operator()(int i, int j, int k, int l) { return a_[idx(i, j, k, l)]; }
    int dim(int axis) const { return d_[axis]; }
    double max_abs() const;

  private:
    size_t idx(int i, int j, int k, int l) const {
        return ((static_cast<size_t>(i) * d_[1] + j) * d_[2] + k) * d_[3] + l;
    }
    int d_[4] = {0, 0, 0, 0};
    std::vector<double> a_;
};

// Neumaier compensated accumulator; used for all fixed-order quadrature
// reductions so results do not depend on worker count.
class CompensatedSum {
  public:
    void add(double x) {
        const double t = s_ + x;
        if (std::abs(s_) >= std::abs(x))
            c_ += (s_ - t) + x;
        else
            c_ += (x - t) + s_;
        s_ = t;
    }
    double value() const { return s_ + c_; }

  private:
    double s_ = 0.0, c_ = 0.0;
};

long binomial(int n, int k);

}  // namespace msk
