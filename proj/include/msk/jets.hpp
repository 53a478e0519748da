#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <functional>
#include <span>
#include <vector>

#include "msk/errors.hpp"

namespace msk {

// Truncated multivariate Taylor scalar: value plus partial derivatives up to a
// requested order (<= 3) in `nvars` variables. Charts, potentials and test
// functions are written once as Jet formulas, which yields their first, second
// and third partial derivatives exactly (to roundoff) instead of by hand-derived
// chain rules.
//
// Order 0..2 stays in fixed-size arrays; the third-order block is heap-backed
// and only allocated when order == 3, so quadrature sweeps (order 2) do not
// allocate.
class Jet {
  public:
    static constexpr int kMaxVars = 8;

    Jet() = default;
    Jet(int nvars, int order, double value) { reset(nvars, order, value); }

    // Seeds the `index`-th coordinate variable: value v, d/dx_index = 1.
    static Jet variable(int nvars, int order, int index, double v) {
        Jet j(nvars, order, v);
        if (order >= 1) j.g_[index] = 1.0;
        return j;
    }
    static Jet constant(int nvars, int order, double v) { return Jet(nvars, order, v); }

    void reset(int nvars, int order, double value) {
        if (nvars < 1 || nvars > kMaxVars) throw domain_error("Jet: nvars out of range");
        if (order < 0 || order > 3) throw domain_error("Jet: order out of range");
        n_ = nvars;
        ord_ = order;
        v_ = value;
        g_.fill(0.0);
        h_.fill(0.0);
        if (ord_ >= 3)
            t_.assign(static_cast<size_t>(n_) * n_ * n_, 0.0);
        else
            t_.clear();
    }

    int nvars() const { return n_; }
    int order() const { return ord_; }
    double value() const { return v_; }
    double& value() { return v_; }
    double d1(int i) const { return g_[i]; }
    double& d1(int i) { return g_[i]; }
    double d2(int i, int j) const { return h_[i * kMaxVars + j]; }
    double& d2(int i, int j) { return h_[i * kMaxVars + j]; }
    double d3(int i, int j, int k) const { return t_[(static_cast<size_t>(i) * n_ + j) * n_ + k]; }
    double& d3(int i, int j, int k) { return t_[(static_cast<size_t>(i) * n_ + j) * n_ + k]; }

    Jet& operator+=(const Jet& o) {
        v_ += o.v_;
        if (ord_ >= 1)
            for (int i = 0; i < n_; ++i) g_[i] += o.g_[i];
        if (ord_ >= 2)
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) d2(i, j) += o.d2(i, j);
        if (ord_ >= 3)
            for (size_t i = 0; i < t_.size(); ++i) t_[i] += o.t_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        v_ -= o.v_;
        if (ord_ >= 1)
            for (int i = 0; i < n_; ++i) g_[i] -= o.g_[i];
        if (ord_ >= 2)
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) d2(i, j) -= o.d2(i, j);
        if (ord_ >= 3)
            for (size_t i = 0; i < t_.size(); ++i) t_[i] -= o.t_[i];
        return *this;
    }
    Jet& operator*=(double c) {
        v_ *= c;
        if (ord_ >= 1)
            for (int i = 0; i < n_; ++i) g_[i] *= c;
        if (ord_ >= 2)
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) d2(i, j) *= c;
        if (ord_ >= 3)
            for (size_t i = 0; i < t_.size(); ++i) t_[i] *= c;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, double c) { return a *= c; }
    friend Jet operator*(double c, Jet a) { return a *= c; }
    friend Jet operator+(Jet a, double c) { a.v_ += c; return a; }
    friend Jet operator+(double c, Jet a) { a.v_ += c; return a; }
    friend Jet operator-(Jet a, double c) { a.v_ -= c; return a; }
    friend Jet operator-(double c, Jet a) { a *= -1.0; a.v_ += c; return a; }
    friend Jet operator-(Jet a) { a *= -1.0; return a; }

    // Leibniz rule through third order.
    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r(a.n_, a.ord_, a.v_ * b.v_);
        const int n = a.n_;
        if (r.ord_ >= 1)
            for (int i = 0; i < n; ++i) r.g_[i] = a.g_[i] * b.v_ + a.v_ * b.g_[i];
        if (r.ord_ >= 2)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    r.d2(i, j) = a.d2(i, j) * b.v_ + a.g_[i] * b.g_[j] + a.g_[j] * b.g_[i] +
                                 a.v_ * b.d2(i, j);
        if (r.ord_ >= 3)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        r.d3(i, j, k) = a.d3(i, j, k) * b.v_ + a.d2(i, j) * b.g_[k] +
                                        a.d2(i, k) * b.g_[j] + a.d2(j, k) * b.g_[i] +
                                        a.g_[i] * b.d2(j, k) + a.g_[j] * b.d2(i, k) +
                                        a.g_[k] * b.d2(i, j) + a.v_ * b.d3(i, j, k);
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) {
        const double x = b.v_;
        return a * compose(b, 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x), -6.0 / (x * x * x * x));
    }
    friend Jet operator/(const Jet& a, double c) { return a * (1.0 / c); }
    friend Jet operator/(double c, const Jet& b) {
        const double x = b.v_;
        Jet r = compose(b, 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x), -6.0 / (x * x * x * x));
        return r *= c;
    }

    // f(u) with univariate derivatives f0..f3 at u.value().
    static Jet compose(const Jet& u, double f0, double f1, double f2, double f3) {
        Jet r(u.n_, u.ord_, f0);
        const int n = u.n_;
        if (r.ord_ >= 1)
            for (int i = 0; i < n; ++i) r.g_[i] = f1 * u.g_[i];
        if (r.ord_ >= 2)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) r.d2(i, j) = f1 * u.d2(i, j) + f2 * u.g_[i] * u.g_[j];
        if (r.ord_ >= 3)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        r.d3(i, j, k) = f1 * u.d3(i, j, k) +
                                        f2 * (u.g_[i] * u.d2(j, k) + u.g_[j] * u.d2(i, k) +
                                              u.g_[k] * u.d2(i, j)) +
                                        f3 * u.g_[i] * u.g_[j] * u.g_[k];
        return r;
    }

  private:
    int n_ = 1;
    int ord_ = 0;
    double v_ = 0.0;
    std::array<double, kMaxVars> g_{};
    std::array<double, kMaxVars * kMaxVars> h_{};
    std::vector<double> t_;
};

inline Jet sin(const Jet& u) {
    const double s = std::sin(u.value()), c = std::cos(u.value());
    return Jet::compose(u, s, c, -s, -c);
}
inline Jet cos(const Jet& u) {
    const double s = std::sin(u.value()), c = std::cos(u.value());
    return Jet::compose(u, c, -s, -c, s);
}
inline Jet exp(const Jet& u) {
    const double e = std::exp(u.value());
    return Jet::compose(u, e, e, e, e);
}
inline Jet log(const Jet& u) {
    const double x = u.value();
    return Jet::compose(u, std::log(x), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x));
}
inline Jet sqrt(const Jet& u) {
    const double r = std::sqrt(u.value());
    return Jet::compose(u, r, 0.5 / r, -0.25 / (r * u.value()), 0.375 / (r * u.value() * u.value()));
}
inline Jet pow_int(const Jet& u, int p) {
    if (p < 0) return 1.0 / pow_int(u, -p);
    Jet r = Jet::constant(u.nvars(), u.order(), 1.0);
    for (int i = 0; i < p; ++i) r = r * u;
    return r;
}

// A scalar formula over an ambient/chart point expressed in jets.
using JetFn = std::function<Jet(std::span<const Jet>)>;

// Seeds variables at `x` and evaluates `f` with derivatives up to `order`.
inline Jet eval_jet(const JetFn& f, std::span<const double> x, int order) {
    std::vector<Jet> vars;
    vars.reserve(x.size());
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(n, order, i, x[i]));
    return f(vars);
}

}  // namespace msk
