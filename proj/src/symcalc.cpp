#include "msk/symcalc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msk/rng.hpp"

namespace msk::symcalc {

namespace {

void check_spectrum(const Spectrum& lambda) {
    if (lambda.empty()) throw domain_error("spectrum: length must be >= 1");
    for (double v : lambda)
        if (!std::isfinite(v)) throw validation_error("spectrum: non-finite entry");
}

// All permutations of {0..m-1} with signs, built once per size.
struct PermTable {
    std::vector<std::vector<int>> perms;
    std::vector<int> signs;
};

const PermTable& perm_table(int m) {
    static std::vector<PermTable> cache(10);
    PermTable& t = cache.at(m);
    if (t.perms.empty()) {
        std::vector<int> p(m);
        for (int i = 0; i < m; ++i) p[i] = i;
        do {
            int inv = 0;
            for (int i = 0; i < m; ++i)
                for (int j = i + 1; j < m; ++j)
                    if (p[i] > p[j]) ++inv;
            t.perms.push_back(p);
            t.signs.push_back(inv % 2 == 0 ? 1 : -1);
        } while (std::next_permutation(p.begin(), p.end()));
    }
    return t;
}

// Equal-argument Newton tensor chain T_0..T_k via T_j = sigma_j I - T_{j-1} A
// with sigma_j = Tr(T_{j-1} A)/j (Faddeev-LeVerrier form of the recursion).
std::vector<Matrix> newton_chain(const Matrix& a, int k) {
    const int n = a.rows();
    std::vector<Matrix> t;
    t.reserve(k + 1);
    t.push_back(Matrix::identity(n));
    for (int j = 1; j <= k; ++j) {
        const Matrix ta = t.back() * a;
        const double sigma_j = ta.trace() / j;
        Matrix tj = Matrix::identity(n).scaled(sigma_j) - ta;
        t.push_back(std::move(tj));
    }
    return t;
}

Matrix newton_diag(const SymMatrix& a, int k) { return newton_chain(a.mat(), k)[k]; }

}  // namespace

MatrixTuple::MatrixTuple(std::vector<SymMatrix> a) : args(std::move(a)) {
    if (args.empty()) throw domain_error("MatrixTuple: needs at least one argument");
    const int n = args.front().dim();
    for (const auto& m : args)
        if (m.dim() != n) throw validation_error("MatrixTuple: mismatched dims");
    if (static_cast<int>(args.size()) > n)
        throw domain_error("MatrixTuple: k must satisfy 1 <= k <= n");
}

MatrixTuple MatrixTuple::repeated(const SymMatrix& a, int k) {
    return MatrixTuple(std::vector<SymMatrix>(k, a));
}

double sigma(const Spectrum& lambda, int k) {
    check_spectrum(lambda);
    const int n = static_cast<int>(lambda.size());
    if (k < 0 || k > n) throw domain_error("sigma: k out of [0, n]");
    return sigma_all(lambda, k)[k];
}

Vec sigma_all(const Spectrum& lambda, int kmax) {
    check_spectrum(lambda);
    const int n = static_cast<int>(lambda.size());
    if (kmax < 0 || kmax > n) throw domain_error("sigma_all: kmax out of [0, n]");
    Vec e(kmax + 1, 0.0);
    e[0] = 1.0;
    for (int m = 0; m < n; ++m)
        for (int j = std::min(kmax, m + 1); j >= 1; --j) e[j] += lambda[m] * e[j - 1];
    return e;
}

double sigma_matrix(const SymMatrix& a, int k) {
    if (k < 0 || k > a.dim()) throw domain_error("sigma_matrix: k out of [0, n]");
    return sigma(eigen_sym(a).values, k);
}

ConeQuery cone_member(const Spectrum& lambda, int k) {
    check_spectrum(lambda);
    const int n = static_cast<int>(lambda.size());
    if (k < 1 || k > n) throw domain_error("cone_member: k out of [1, n]");
    const Vec e = sigma_all(lambda, k);
    ConeQuery q;
    q.k = k;
    q.margins.assign(e.begin() + 1, e.end());
    q.member = true;
    for (double m : q.margins)
        if (!(m > 0.0)) q.member = false;
    return q;
}

ConeQuery cone_member(const SymMatrix& a, int k) {
    return cone_member(eigen_sym(a).values, k);
}

Spectrum sample_cone(int n, int k, std::uint64_t seed) {
    if (n < 1 || k < 1 || k > n) throw domain_error("sample_cone: need 1 <= k <= n");
    Rng rng(seed);
    Spectrum base(n);
    for (double& v : base) v = rng.normal();

    const double margin = 0.1;
    auto ok = [&](double t) {
        Spectrum s = base;
        for (double& v : s) v += t;
        const Vec e = sigma_all(s, k);
        for (int j = 1; j <= k; ++j)
            if (e[j] < margin) return false;
        return true;
    };

    if (ok(0.0)) return base;
    double lo = 0.0, hi = 1.0;
    while (!ok(hi)) hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    Spectrum out = base;
    for (double& v : out) v += hi;  // hi side satisfies the margin
    return out;
}

SymMatrix sample_cone_matrix(int n, int k, std::uint64_t seed) {
    const Spectrum lambda = sample_cone(n, k, seed);
    Rng rng(derive_seed(seed, 0x5eedu));
    // Householder QR of a Gaussian matrix, diag(R) sign-fixed, gives a
    // deterministic orthogonal Q.
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    Matrix q = Matrix::identity(n);
    for (int col = 0; col < n; ++col) {
        Vec v(n, 0.0);
        double norm = 0.0;
        for (int i = col; i < n; ++i) {
            v[i] = g(i, col);
            norm += v[i] * v[i];
        }
        norm = std::sqrt(norm);
        if (norm < 1e-14) continue;
        v[col] += (v[col] >= 0 ? norm : -norm);
        double vv = 0.0;
        for (int i = col; i < n; ++i) vv += v[i] * v[i];
        if (vv < 1e-300) continue;
        auto reflect = [&](Matrix& m) {
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int i = col; i < n; ++i) s += v[i] * m(i, j);
                s *= 2.0 / vv;
                for (int i = col; i < n; ++i) m(i, j) -= s * v[i];
            }
        };
        reflect(g);
        reflect(q);
    }
    // q now holds Q^T; rows are orthonormal.
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int m = 0; m < n; ++m) s += q(m, i) * lambda[m] * q(m, j);
            a(i, j) = s;
        }
    return SymMatrix::symmetrize(a);
}

SymMatrix newton_tensor_oracle(const MatrixTuple& args) {
    const int k = args.k();
    const int n = args.dim();
    Matrix t(n, n);
    if (k + 1 <= n) {
        const PermTable& pt = perm_table(k + 1);
        // Ordered (k+1)-tuples of distinct indices; the generalized delta
        // restricted to such tuples is the permutation sign.
        std::vector<int> u(k + 1, 0);
        std::vector<bool> used(n, false);
        double inv_kfact = 1.0;
        for (int j = 2; j <= k; ++j) inv_kfact /= j;

        auto rec = [&](auto&& self, int depth) -> void {
            if (depth == k + 1) {
                for (size_t pi = 0; pi < pt.perms.size(); ++pi) {
                    const std::vector<int>& s = pt.perms[pi];
                    double prod = pt.signs[pi] * inv_kfact;
                    for (int p = 1; p <= k; ++p) prod *= args.args[p - 1](u[p], u[s[p]]);
                    t(u[0], u[s[0]]) += prod;
                }
                return;
            }
            for (int i = 0; i < n; ++i) {
                if (used[i]) continue;
                used[i] = true;
                u[depth] = i;
                self(self, depth + 1);
                used[i] = false;
            }
        };
        rec(rec, 0);
    }
    // k + 1 > n leaves the tensor identically zero (no distinct index tuple).
    return SymMatrix::symmetrize(t);
}

SymMatrix newton_tensor(const MatrixTuple& args) {
    const int k = args.k();
    const int n = args.dim();
    bool equal = true;
    for (int p = 1; p < k && equal; ++p) {
        for (int i = 0; i < n && equal; ++i)
            for (int j = 0; j < n; ++j)
                if (args.args[p](i, j) != args.args[0](i, j)) {
                    equal = false;
                    break;
                }
    }
    if (equal) return SymMatrix::symmetrize(newton_diag(args.args[0], k));

    // Inclusion-exclusion polarization of the diagonal:
    // T_k(A_1..A_k) = (1/k!) sum_{S != 0} (-1)^{k-|S|} T_k(sum_{i in S} A_i).
    Matrix acc(n, n);
    const int total = 1 << k;
    for (int mask = 1; mask < total; ++mask) {
        Matrix s(n, n);
        int bits = 0;
        for (int p = 0; p < k; ++p)
            if (mask & (1 << p)) {
                ++bits;
                s = s + args.args[p].mat();
            }
        const double sign = ((k - bits) % 2 == 0) ? 1.0 : -1.0;
        acc = acc + newton_chain(s, k)[k].scaled(sign);
    }
    double inv_kfact = 1.0;
    for (int j = 2; j <= k; ++j) inv_kfact /= j;
    return SymMatrix::symmetrize(acc.scaled(inv_kfact));
}

SymMatrix newton_tensor(const SymMatrix& a, int k) {
    if (k == 0) return SymMatrix::identity(a.dim());
    return newton_tensor(MatrixTuple::repeated(a, k));
}

double polarized_sigma(const MatrixTuple& args) {
    const int k = args.k();
    const SymMatrix& a1 = args.args.front();
    SymMatrix t = SymMatrix::identity(args.dim());
    if (k > 1) {
        MatrixTuple rest;
        rest.args.assign(args.args.begin() + 1, args.args.end());
        t = newton_tensor(rest);
    }
    double s = 0.0;
    for (int i = 0; i < args.dim(); ++i)
        for (int j = 0; j < args.dim(); ++j) s += a1(i, j) * t(i, j);
    return s;
}

namespace {

double sigma_oracle(const SymMatrix& a, int k) {
    // Tr(T_{k-1}^oracle A)/k keeps the residual checks on the oracle route.
    if (k == 0) return 1.0;
    SymMatrix t = (k == 1) ? SymMatrix::identity(a.dim())
                           : newton_tensor_oracle(MatrixTuple::repeated(a, k - 1));
    return (t.mat() * a.mat()).trace() / k;
}

}  // namespace

double trace1_residual(const SymMatrix& a, int k) {
    const int n = a.dim();
    if (k >= n) throw domain_error("trace1: requires k < n");
    if (k < 1) throw domain_error("trace1: requires k >= 1");
    const SymMatrix t = newton_tensor_oracle(MatrixTuple::repeated(a, k));
    const double lhs = sigma_matrix(a, k);
    const double rhs = t.trace() / (n - k);
    const double scale = std::max(std::abs(lhs), t.max_abs());
    return std::abs(lhs - rhs) / (1.0 + scale);
}

double trace2_residual(const SymMatrix& a, int k) {
    const int n = a.dim();
    if (k < 1 || k + 1 > n) throw domain_error("trace2: requires 1 <= k <= n-1");
    const SymMatrix t = newton_tensor_oracle(MatrixTuple::repeated(a, k));
    const double lhs = sigma_matrix(a, k + 1);
    const double rhs = (t.mat() * a.mat()).trace() / (k + 1);
    const double scale = std::max(std::abs(lhs), t.max_abs() * a.max_abs());
    return std::abs(lhs - rhs) / (1.0 + scale);
}

double recursion_residual(const SymMatrix& a, int k) {
    const int n = a.dim();
    if (k < 1 || k > n) throw domain_error("recursionT: requires 1 <= k <= n");
    const SymMatrix lhs = newton_tensor_oracle(MatrixTuple::repeated(a, k));
    const SymMatrix tkm1 = (k == 1) ? SymMatrix::identity(n)
                                    : newton_tensor_oracle(MatrixTuple::repeated(a, k - 1));
    const Matrix rhs = Matrix::identity(n).scaled(sigma_oracle(a, k)) - tkm1.mat() * a.mat();
    const Matrix diff = lhs.mat() - rhs;
    const double scale = std::max(lhs.max_abs(), rhs.max_abs());
    return diff.max_abs() / (1.0 + scale);
}

double lemma22_residual(const SymMatrix& b, const SymMatrix& c, int k, int l) {
    const int n = b.dim();
    if (c.dim() != n) throw validation_error("lemma22: mismatched dims");
    if (k < 2 || k > n || l < 1 || l > k - 1)
        throw domain_error("lemma22: requires 2 <= k <= n and 1 <= l <= k-1");

    auto mixed = [&](int nb, int nc, int order) {
        std::vector<SymMatrix> v;
        v.insert(v.end(), nb, b);
        v.insert(v.end(), nc, c);
        if (order == 0) return SymMatrix::identity(n);
        return newton_tensor_oracle(MatrixTuple(std::move(v)));
    };

    const SymMatrix t_lhs = mixed(l, k - 1 - l, k - 1);
    const Matrix lhs = t_lhs.mat() * c.mat();

    std::vector<SymMatrix> sig_args;
    sig_args.insert(sig_args.end(), l, b);
    sig_args.insert(sig_args.end(), k - l, c);
    const double sig = polarized_sigma(MatrixTuple(sig_args));

    const double ckl = static_cast<double>(binomial(k, l));
    const double ckm1l = static_cast<double>(binomial(k - 1, l));
    const double ckm1lm1 = static_cast<double>(binomial(k - 1, l - 1));

    const SymMatrix tk = mixed(l, k - l, k);
    const SymMatrix tkm1 = mixed(l - 1, k - l, k - 1);

    const Matrix rhs = Matrix::identity(n).scaled(ckl / (k * ckm1l) * sig) -
                       tk.mat().scaled(ckl / ckm1l) -
                       (tkm1.mat() * b.mat()).scaled(ckm1lm1 / ckm1l);

    const double scale = std::max({lhs.max_abs(), rhs.max_abs(), std::abs(sig)});
    return (lhs - rhs).max_abs() / (1.0 + scale);
}

double identity_residual(IdentityKind kind, const IdentityInputs& in) {
    switch (kind) {
        case IdentityKind::trace1: return trace1_residual(in.a, in.k);
        case IdentityKind::trace2: return trace2_residual(in.a, in.k);
        case IdentityKind::recursionT: return recursion_residual(in.a, in.k);
        case IdentityKind::lemma22: return lemma22_residual(in.a, in.b, in.k, in.l);
    }
    throw domain_error("identity_residual: unknown kind");
}

int garding_probe(GardingProperty prop, int n, int k, int trials, std::uint64_t seed) {
    if (n < 1 || k < 1 || k > n) throw domain_error("garding_probe: need 1 <= k <= n");
    if (prop == GardingProperty::ii && k + 1 > n)
        throw domain_error("garding_probe: property (ii) needs k+1 <= n");
    int violations = 0;

    for (int t = 0; t < trials; ++t) {
        switch (prop) {
            case GardingProperty::i: {
                // d sigma_k / d lambda_i = sigma_{k-1} of the spectrum with
                // lambda_i removed; strictly positive inside the cone.
                const Spectrum lambda = sample_cone(n, k, derive_seed(seed, t));
                for (int i = 0; i < n; ++i) {
                    Spectrum rest;
                    rest.reserve(n - 1);
                    for (int j = 0; j < n; ++j)
                        if (j != i) rest.push_back(lambda[j]);
                    const double d = rest.empty() ? 1.0 : sigma(rest, k - 1);
                    if (!(d > 0.0)) ++violations;
                }
                break;
            }
            case GardingProperty::ii: {
                std::vector<SymMatrix> a;
                for (int p = 0; p < k; ++p)
                    a.push_back(sample_cone_matrix(n, k + 1, derive_seed(seed, t, p)));
                const SymMatrix tk = newton_tensor(MatrixTuple(a));
                const double scale = tk.max_abs();
                if (min_eigenvalue(tk) <= -1e-12 * (1.0 + scale)) ++violations;
                break;
            }
            case GardingProperty::iii: {
                std::vector<SymMatrix> a;
                for (int p = 0; p < k; ++p)
                    a.push_back(sample_cone_matrix(n, k, derive_seed(seed, t, p)));
                if (!(polarized_sigma(MatrixTuple(a)) > 0.0)) ++violations;
                break;
            }
            case GardingProperty::iv: {
                // A = B + D with D in the cone; Sigma_k must strictly increase
                // in the first slot.
                const SymMatrix b = sample_cone_matrix(n, k, derive_seed(seed, t, 100));
                const SymMatrix d = sample_cone_matrix(n, k, derive_seed(seed, t, 200));
                std::vector<SymMatrix> lo{b}, hi{b + d};
                for (int p = 1; p < k; ++p) {
                    const SymMatrix rest = sample_cone_matrix(n, k, derive_seed(seed, t, p));
                    lo.push_back(rest);
                    hi.push_back(rest);
                }
                if (!(polarized_sigma(MatrixTuple(hi)) > polarized_sigma(MatrixTuple(lo))))
                    ++violations;
                break;
            }
        }
    }
    return violations;
}

int concavity_probe(ConcavityExpr expr, int n, int k, int l, int trials, std::uint64_t seed) {
    if (n < 1 || k < 1 || k > n) throw domain_error("concavity_probe: need 1 <= k <= n");
    if (expr == ConcavityExpr::ratio_root && (l < 0 || l >= k))
        throw domain_error("concavity_probe: ratio_root needs 0 <= l < k");

    auto f = [&](const Spectrum& lambda) {
        const Vec e = sigma_all(lambda, k);
        if (expr == ConcavityExpr::sigma_k_root) return std::pow(e[k], 1.0 / k);
        return std::pow(e[k] / e[l], 1.0 / (k - l));
    };

    int violations = 0;
    for (int t = 0; t < trials; ++t) {
        const Spectrum x = sample_cone(n, k, derive_seed(seed, t, 1));
        const Spectrum y = sample_cone(n, k, derive_seed(seed, t, 2));
        Rng rng(derive_seed(seed, t, 3));
        const double w = rng.uniform(1e-3, 1.0 - 1e-3);
        Spectrum mid(n);
        for (int i = 0; i < n; ++i) mid[i] = w * x[i] + (1.0 - w) * y[i];
        const double fx = f(x), fy = f(y), fm = f(mid);
        const double scale = std::max({std::abs(fx), std::abs(fy), std::abs(fm)});
        if (fm < w * fx + (1.0 - w) * fy - 1e-10 * (1.0 + scale)) ++violations;
    }
    return violations;
}

}  // namespace msk::symcalc
