#include <doctest.h>

#include <cmath>

#include "msk/rng.hpp"
#include "msk/symcalc.hpp"
#include "support/oracles.hpp"

using namespace msk;
using namespace msk::symcalc;

namespace {

SymMatrix random_sym(int n, Rng& rng) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m.set(i, j, rng.uniform(-2.0, 2.0));
    return m;
}

}  // namespace

TEST_CASE("sigma on spectra") {
    CHECK(sigma({1, 2, 3}, 2) == doctest::Approx(11.0));
    CHECK(sigma({1, 1, 1, 1, 1}, 3) == doctest::Approx(10.0));
    CHECK(sigma({3, 1, -1}, 2) == doctest::Approx(-1.0));
    CHECK(sigma({4, 5}, 0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(sigma({1, 2}, 3), domain_error);
    CHECK_THROWS_AS(sigma({1, 2}, -1), domain_error);
    CHECK_THROWS_AS(sigma({}, 0), domain_error);

    // against subset enumeration
    Rng rng(3);
    for (int n = 2; n <= 8; ++n) {
        Vec lambda(n);
        for (double& v : lambda) v = rng.uniform(-2, 2);
        for (int k = 0; k <= n; ++k)
            CHECK(sigma(lambda, k) ==
                  doctest::Approx(testsupport::sigma_subsets(lambda, k)).epsilon(1e-12));
    }
}

TEST_CASE("sigma homogeneity") {
    Rng rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 2 + rng.index(5);
        const int k = 1 + rng.index(n);
        Vec lambda(n);
        for (double& v : lambda) v = rng.uniform(-2, 2);
        const double t = rng.uniform(0.1, 10.0);
        Vec scaled = lambda;
        for (double& v : scaled) v *= t;
        const double lhs = sigma(scaled, k);
        const double rhs = std::pow(t, k) * sigma(lambda, k);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("sigma_matrix against principal minors") {
    CHECK(sigma_matrix(SymMatrix::diagonal({1, 2, 3}), 3) == doctest::Approx(6.0));
    CHECK(sigma_matrix(SymMatrix::identity(4), 2) == doctest::Approx(6.0));
    Rng rng(23);
    for (int n = 2; n <= 6; ++n)
        for (int rep = 0; rep < 5; ++rep) {
            const SymMatrix a = random_sym(n, rng);
            for (int k = 0; k <= n; ++k) {
                const double mine = sigma_matrix(a, k);
                const double oracle = testsupport::sigma_principal_minors(a, k);
                CHECK(std::abs(mine - oracle) <= 1e-10 * (1.0 + std::abs(oracle)));
            }
        }
}

TEST_CASE("cone membership and nesting") {
    CHECK(cone_member(Vec{1, 1, 1}, 3).member);
    const ConeQuery q = cone_member(Vec{3, 1, -1}, 2);
    CHECK_FALSE(q.member);
    CHECK(q.margins[0] == doctest::Approx(3.0));
    CHECK(q.margins[1] == doctest::Approx(-1.0));
    CHECK(cone_member(Vec{3, 1, -1}, 1).member);

    // Gamma_k in Gamma_j for j < k on sampled spectra
    Rng rng(29);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 2 + rng.index(5);
        const int k = 1 + rng.index(n);
        const Vec lambda = sample_cone(n, k, derive_seed(999, rep));
        for (int j = 1; j <= k; ++j) CHECK(cone_member(lambda, j).member);
    }
}

TEST_CASE("sample_cone determinism and margins") {
    const Vec a = sample_cone(3, 3, 7);
    const Vec b = sample_cone(3, 3, 7);
    CHECK(a == b);
    const Vec e = sigma_all(a, 3);
    for (int j = 1; j <= 3; ++j) CHECK(e[j] >= 0.1 - 1e-12);
    CHECK(cone_member(sample_cone(5, 2, 1), 2).member);
}

TEST_CASE("newton tensor examples") {
    const SymMatrix d123 = SymMatrix::diagonal({1, 2, 3});
    const SymMatrix t1 = newton_tensor_oracle(MatrixTuple::repeated(d123, 1));
    CHECK(t1(0, 0) == doctest::Approx(5.0));
    CHECK(t1(1, 1) == doctest::Approx(4.0));
    CHECK(t1(2, 2) == doctest::Approx(3.0));

    const SymMatrix t2 = newton_tensor_oracle(MatrixTuple::repeated(SymMatrix::identity(4), 2));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(t2(i, j) == doctest::Approx(i == j ? 3.0 : 0.0));

    // fast path matches the oracle on a mixed diagonal pair
    const SymMatrix b = SymMatrix::diagonal({1, 2});
    const SymMatrix c = SymMatrix::diagonal({3, 4});
    const SymMatrix fast = newton_tensor(MatrixTuple({b, c}));
    const SymMatrix oracle = newton_tensor_oracle(MatrixTuple({b, c}));
    CHECK((fast - oracle).max_abs() <= 1e-12);
}

TEST_CASE("newton tensor trace law and oracle equivalence") {
    Rng rng(31);
    for (int n = 2; n <= 5; ++n)
        for (int k = 1; k <= std::min(n, 4); ++k)
            for (int rep = 0; rep < 10; ++rep) {
                std::vector<SymMatrix> args;
                for (int p = 0; p < k; ++p) args.push_back(random_sym(n, rng));
                const MatrixTuple tuple(args);
                const SymMatrix fast = newton_tensor(tuple);
                const SymMatrix oracle = newton_tensor_oracle(tuple);
                CHECK((fast - oracle).max_abs() <= 1e-10 * (1.0 + oracle.max_abs()));
            }

    // equal arguments: trace identity Tr T_k = (n-k) sigma_k
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 5;
        const int k = 3;
        const SymMatrix a = random_sym(n, rng);
        const SymMatrix t = newton_tensor(a, k);
        CHECK(t.trace() ==
              doctest::Approx((n - k) * sigma_matrix(a, k)).epsilon(1e-10));
    }
}

TEST_CASE("polarized sigma") {
    const SymMatrix a = SymMatrix::diagonal({1, 2});
    CHECK(polarized_sigma(MatrixTuple::repeated(a, 2)) == doctest::Approx(4.0));
    const SymMatrix b = SymMatrix::diagonal({3, 4});
    CHECK(polarized_sigma(MatrixTuple({a, b})) == doctest::Approx(10.0));

    // normalization Sigma_k(A..A) = k sigma_k(A)
    Rng rng(37);
    for (int rep = 0; rep < 30; ++rep) {
        const int n = 2 + rng.index(4);
        const int k = 1 + rng.index(n);
        const SymMatrix m = random_sym(n, rng);
        const double lhs = polarized_sigma(MatrixTuple::repeated(m, k));
        const double rhs = k * sigma_matrix(m, k);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("argument symmetry of the polarized forms") {
    Rng rng(41);
    const int n = 4, k = 3;
    std::vector<SymMatrix> args;
    for (int p = 0; p < k; ++p) args.push_back(random_sym(n, rng));
    const double base = polarized_sigma(MatrixTuple(args));
    const SymMatrix tbase = newton_tensor(MatrixTuple(args));
    const int perms[][3] = {{0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perms) {
        const MatrixTuple t({args[p[0]], args[p[1]], args[p[2]]});
        CHECK(std::abs(polarized_sigma(t) - base) <= 1e-12 * (1.0 + std::abs(base)));
        CHECK((newton_tensor(t) - tbase).max_abs() <= 1e-12 * (1.0 + tbase.max_abs()));
    }
}

TEST_CASE("identity residuals") {
    CHECK(trace1_residual(SymMatrix::identity(4), 2) <= 1e-14);
    CHECK(recursion_residual(SymMatrix::diagonal({1, 2, 3}), 2) <= 1e-12);
    CHECK_THROWS_AS(trace1_residual(SymMatrix::identity(3), 3), domain_error);

    Rng rng(43);
    for (int n = 2; n <= 6; ++n)
        for (int rep = 0; rep < 4; ++rep) {
            const SymMatrix a = random_sym(n, rng);
            for (int k = 1; k < n; ++k) {
                CHECK(trace1_residual(a, k) <= 1e-10);
                CHECK(trace2_residual(a, k) <= 1e-10);
            }
            for (int k = 1; k <= n; ++k) CHECK(recursion_residual(a, k) <= 1e-10);
            for (int k = 2; k <= n; ++k)
                for (int l = 1; l <= k - 1; ++l)
                    CHECK(lemma22_residual(a, random_sym(n, rng), k, l) <= 1e-10);
        }

    // enum dispatcher
    IdentityInputs in;
    in.a = SymMatrix::identity(4);
    in.k = 2;
    CHECK(identity_residual(IdentityKind::trace1, in) <= 1e-14);
}

TEST_CASE("garding probes find no violations") {
    CHECK(garding_probe(GardingProperty::i, 4, 2, 300, 71) == 0);
    CHECK(garding_probe(GardingProperty::ii, 5, 3, 100, 72) == 0);
    CHECK(garding_probe(GardingProperty::iii, 4, 3, 100, 73) == 0);
    CHECK(garding_probe(GardingProperty::iv, 3, 2, 200, 74) == 0);
    CHECK_THROWS_AS(garding_probe(GardingProperty::ii, 3, 3, 10, 75), domain_error);
}

TEST_CASE("concavity probes") {
    CHECK(concavity_probe(ConcavityExpr::sigma_k_root, 4, 2, 0, 300, 81) == 0);
    CHECK(concavity_probe(ConcavityExpr::ratio_root, 4, 3, 1, 300, 82) == 0);
    CHECK_THROWS_AS(concavity_probe(ConcavityExpr::ratio_root, 4, 3, 3, 10, 83), domain_error);

    // homogeneity degree one along a ray: equality at the midpoint
    const Vec lam = {1, 1, 1}, mu = {2, 2, 2};
    Vec mid(3);
    for (int i = 0; i < 3; ++i) mid[i] = 0.5 * (lam[i] + mu[i]);
    const double f = std::sqrt(sigma(mid, 2));
    const double avg = 0.5 * std::sqrt(sigma(lam, 2)) + 0.5 * std::sqrt(sigma(mu, 2));
    CHECK(std::abs(f - avg) <= 1e-12);
}
