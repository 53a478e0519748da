#include "msk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace msk {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double max_abs(const Vec& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(c_, r_);
    for (int i = 0; i < r_; ++i)
        for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::operator*(const Matrix& o) const {
    if (c_ != o.r_) throw validation_error("Matrix multiply: dimension mismatch");
    Matrix p(r_, o.c_);
    for (int i = 0; i < r_; ++i)
        for (int k = 0; k < c_; ++k) {
            const double aik = (*this)(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < o.c_; ++j) p(i, j) += aik * o(k, j);
        }
    return p;
}

Matrix Matrix::operator+(const Matrix& o) const {
    Matrix p(r_, c_);
    for (size_t i = 0; i < a_.size(); ++i) p.a_[i] = a_[i] + o.a_[i];
    return p;
}

Matrix Matrix::operator-(const Matrix& o) const {
    Matrix p(r_, c_);
    for (size_t i = 0; i < a_.size(); ++i) p.a_[i] = a_[i] - o.a_[i];
    return p;
}

Matrix Matrix::scaled(double c) const {
    Matrix p = *this;
    for (auto& x : p.a_) x *= c;
    return p;
}

Vec Matrix::apply(const Vec& x) const {
    Vec y(r_, 0.0);
    for (int i = 0; i < r_; ++i)
        for (int j = 0; j < c_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
}

double Matrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < std::min(r_, c_); ++i) t += (*this)(i, i);
    return t;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
}

SymMatrix::SymMatrix(int n, const std::vector<double>& entries) : n_(n) {
    if (n < 1) throw domain_error("SymMatrix: dim must be >= 1");
    if (entries.size() != static_cast<size_t>(n) * n)
        throw validation_error("SymMatrix: entry count does not match dim");
    double mx = 0.0;
    for (double v : entries) {
        if (!std::isfinite(v)) throw validation_error("SymMatrix: non-finite entry");
        mx = std::max(mx, std::abs(v));
    }
    const double tol = 1e-12 * (1.0 + mx);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(entries[static_cast<size_t>(i) * n + j] -
                         entries[static_cast<size_t>(j) * n + i]) > tol)
                throw validation_error("SymMatrix: asymmetry beyond tolerance at (" +
                                       std::to_string(i) + "," + std::to_string(j) + ")");
    a_.resize(entries.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a_[static_cast<size_t>(i) * n + j] = 0.5 * (entries[static_cast<size_t>(i) * n + j] +
                                                        entries[static_cast<size_t>(j) * n + i]);
}

SymMatrix SymMatrix::identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

SymMatrix SymMatrix::diagonal(const Vec& d) {
    SymMatrix m(static_cast<int>(d.size()));
    for (size_t i = 0; i < d.size(); ++i) m.at(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return m;
}

SymMatrix SymMatrix::symmetrize(const Matrix& m) {
    SymMatrix s(m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) s.at(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

Matrix SymMatrix::mat() const {
    Matrix m(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
    return m;
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
    SymMatrix s(n_);
    for (size_t i = 0; i < a_.size(); ++i) s.a_[i] = a_[i] + o.a_[i];
    return s;
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
    SymMatrix s(n_);
    for (size_t i = 0; i < a_.size(); ++i) s.a_[i] = a_[i] - o.a_[i];
    return s;
}

SymMatrix SymMatrix::scaled(double c) const {
    SymMatrix s = *this;
    for (auto& x : s.a_) x *= c;
    return s;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

double SymMatrix::max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
}

double SymMatrix::frobenius() const {
    double s = 0.0;
    for (double x : a_) s += x * x;
    return std::sqrt(s);
}

EigenSym eigen_sym(const SymMatrix& in) {
    const int n = in.dim();
    Matrix a = in.mat();
    Matrix v = Matrix::identity(n);
    const double fro = in.frobenius();
    const double thresh = 1e-13 * fro;

    auto off_diag = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < 100 && off_diag() > thresh; ++sweep) {
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= thresh / (n * n + 1.0)) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int j = 0; j < n; ++j) {
                    const double apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj - s * aqj;
                    a(q, j) = s * apj + c * aqj;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });

    EigenSym e;
    e.values.resize(n);
    e.vectors = Matrix(n, n);
    for (int k = 0; k < n; ++k) {
        e.values[k] = a(order[k], order[k]);
        for (int i = 0; i < n; ++i) e.vectors(i, k) = v(i, order[k]);
    }
    return e;
}

double min_eigenvalue(const SymMatrix& a) { return eigen_sym(a).values.front(); }

SymMatrix sym_inv_sqrt(const SymMatrix& g) {
    const EigenSym e = eigen_sym(g);
    const int n = g.dim();
    for (double w : e.values)
        if (w <= 0.0) throw validation_error("sym_inv_sqrt: matrix not positive definite");
    Matrix r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += e.vectors(i, k) * e.vectors(j, k) / std::sqrt(e.values[k]);
            r(i, j) = s;
        }
    return SymMatrix::symmetrize(r);
}

Matrix inverse(const Matrix& m) {
    if (m.rows() != m.cols()) throw validation_error("inverse: matrix not square");
    const int n = m.rows();
    Matrix a = m;
    Matrix inv = Matrix::identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) < 1e-300) throw validation_error("inverse: singular matrix");
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        const double d = a(col, col);
        for (int j = 0; j < n; ++j) {
            a(col, j) /= d;
            inv(col, j) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

double determinant(Matrix m) {
    if (m.rows() != m.cols()) throw validation_error("determinant: matrix not square");
    const int n = m.rows();
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
        if (m(piv, col) == 0.0) return 0.0;
        if (piv != col) {
            det = -det;
            for (int j = 0; j < n; ++j) std::swap(m(piv, j), m(col, j));
        }
        det *= m(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = m(r, col) / m(col, col);
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) m(r, j) -= f * m(col, j);
        }
    }
    return det;
}

double Tensor3::max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
}

double Tensor4::max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
}

long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace msk
