#include <doctest.h>

#include <cmath>

#include "msk/jets.hpp"
#include "msk/linalg.hpp"
#include "msk/rng.hpp"

using namespace msk;

namespace {

// f(x, y) = sin(x) * exp(y) / (1 + x^2) + sqrt(2 + y) * log(1 + x^2)
Jet sample_formula(std::span<const Jet> v) {
    const Jet& x = v[0];
    const Jet& y = v[1];
    const Jet x2 = x * x + 1.0;
    return sin(x) * exp(y) / x2 + sqrt(y + 2.0) * log(x2);
}

}  // namespace

TEST_CASE("jet derivatives match finite differences") {
    const Vec at = {0.4, -0.3};
    const Jet j = eval_jet(sample_formula, at, 3);
    const double h = 1e-5;

    auto value = [&](double dx, double dy) {
        const Vec p = {at[0] + dx, at[1] + dy};
        return eval_jet(sample_formula, p, 0).value();
    };

    // gradient and Hessian
    CHECK(j.d1(0) == doctest::Approx((value(h, 0) - value(-h, 0)) / (2 * h)).epsilon(1e-7));
    CHECK(j.d1(1) == doctest::Approx((value(0, h) - value(0, -h)) / (2 * h)).epsilon(1e-7));
    CHECK(j.d2(0, 0) ==
          doctest::Approx((value(h, 0) - 2 * value(0, 0) + value(-h, 0)) / (h * h)).epsilon(1e-4));
    CHECK(j.d2(0, 1) == doctest::Approx((value(h, h) - value(h, -h) - value(-h, h) +
                                         value(-h, -h)) /
                                        (4 * h * h)).epsilon(1e-4));

    // third derivatives against FD of second-order jets
    auto d2_at = [&](double dx, int a, int b) {
        const Vec p = {at[0] + dx, at[1]};
        return eval_jet(sample_formula, p, 2).d2(a, b);
    };
    const double fd3 = (d2_at(h, 0, 1) - d2_at(-h, 0, 1)) / (2 * h);
    CHECK(j.d3(0, 1, 0) == doctest::Approx(fd3).epsilon(1e-6));

    // symmetry of the stored tensors
    CHECK(j.d2(0, 1) == doctest::Approx(j.d2(1, 0)).epsilon(1e-14));
    CHECK(j.d3(0, 0, 1) == doctest::Approx(j.d3(1, 0, 0)).epsilon(1e-12));
}

TEST_CASE("jacobi eigensolver recovers a planted spectrum") {
    Rng rng(11);
    const int n = 6;
    const Vec planted = {-2.5, -0.75, 0.0, 0.3, 1.25, 4.0};

    // A = Q diag Q^T with a random rotation assembled from Givens factors.
    Matrix q = Matrix::identity(n);
    for (int p = 0; p < n - 1; ++p)
        for (int r = p + 1; r < n; ++r) {
            const double th = rng.uniform(0, 6.28);
            const double c = std::cos(th), s = std::sin(th);
            for (int i = 0; i < n; ++i) {
                const double a = q(i, p), b = q(i, r);
                q(i, p) = c * a - s * b;
                q(i, r) = s * a + c * b;
            }
        }
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int m = 0; m < n; ++m) s += q(i, m) * planted[m] * q(j, m);
            a(i, j) = s;
        }
    const EigenSym e = eigen_sym(SymMatrix::symmetrize(a));
    for (int i = 0; i < n; ++i) CHECK(e.values[i] == doctest::Approx(planted[i]).epsilon(1e-12));

    // eigenvectors reproduce A
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int m = 0; m < n; ++m) s += e.vectors(i, m) * e.values[m] * e.vectors(j, m);
            CHECK(s == doctest::Approx(a(i, j)).epsilon(1e-11));
        }
}

TEST_CASE("symmetric matrix validation") {
    CHECK_THROWS_AS(SymMatrix(2, {0.0, 1.0, 2.0, 0.0}), validation_error);
    CHECK_THROWS_AS(SymMatrix(2, {0.0, std::nan(""), std::nan(""), 0.0}), validation_error);
    const SymMatrix ok(2, {1.0, 2.0, 2.0 + 1e-13, 3.0});
    CHECK(ok(0, 1) == ok(1, 0));
}

TEST_CASE("inverse and sym_inv_sqrt") {
    Rng rng(5);
    const int n = 4;
    SymMatrix g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) g.set(i, j, rng.uniform(-0.3, 0.3) + (i == j ? 2.0 : 0.0));
    const Matrix gi = inverse(g.mat());
    const Matrix id = g.mat() * gi;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            CHECK(id(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));

    const SymMatrix p = sym_inv_sqrt(g);
    const Matrix pg = p.mat() * g.mat() * p.mat();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            CHECK(pg(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-11));
}

TEST_CASE("compensated sum survives cancellation") {
    CompensatedSum cs;
    cs.add(1e16);
    for (int i = 0; i < 10; ++i) cs.add(0.1);
    cs.add(-1e16);
    CHECK(cs.value() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("binomial") {
    CHECK(binomial(5, 2) == 10);
    CHECK(binomial(6, 0) == 1);
    CHECK(binomial(4, 5) == 0);
}
