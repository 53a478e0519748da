#pragma once

#include <cstdint>
#include <vector>

#include "msk/linalg.hpp"

namespace msk::symcalc {

// Eigenvalue vector lambda in R^n. Ops validate that it is non-empty and finite.
using Spectrum = Vec;

// Ordered argument tuple for the mixed forms; all members share one dimension.
struct MatrixTuple {
    std::vector<SymMatrix> args;

    MatrixTuple() = default;
    explicit MatrixTuple(std::vector<SymMatrix> a);  // validates
    // k equal slots of the same matrix.
    static MatrixTuple repeated(const SymMatrix& a, int k);

    int k() const { return static_cast<int>(args.size()); }
    int dim() const { return args.empty() ? 0 : args.front().dim(); }
};

struct ConeQuery {
    int k = 0;
    bool member = false;
    Vec margins;  // sigma_1..sigma_k
};

// k-th elementary symmetric function of the spectrum, sigma_0 := 1.
// Coefficient recurrence e_k(l_1..l_m) = e_k(l_1..l_{m-1}) + l_m e_{k-1}(l_1..l_{m-1}),
// O(nk), no subset enumeration.
double sigma(const Spectrum& lambda, int k);

// All of sigma_0..sigma_kmax in one pass.
Vec sigma_all(const Spectrum& lambda, int kmax);

// sigma_k of the eigenvalues of A (cyclic Jacobi eigensolve).
double sigma_matrix(const SymMatrix& a, int k);

// Positive k-cone test: member iff sigma_1..sigma_k all strictly positive.
ConeQuery cone_member(const Spectrum& lambda, int k);
ConeQuery cone_member(const SymMatrix& a, int k);

// Deterministic interior point of Gamma_k^+: standard normal draw shifted along
// (1,...,1) by the smallest t (bisection) that lifts every margin to >= 0.1.
Spectrum sample_cone(int n, int k, std::uint64_t seed);

// Random symmetric matrix with spectrum in Gamma_k^+ (sampled spectrum
// conjugated by a seeded random orthogonal matrix).
SymMatrix sample_cone_matrix(int n, int k, std::uint64_t seed);

// Newton transformation tensor by literal expansion of the generalized
// Kronecker delta as a signed permutation sum. Reference implementation;
// O(P(n,k+1) (k+1)!), intended for n <= 6, k <= 5.
SymMatrix newton_tensor_oracle(const MatrixTuple& args);

// Fast Newton tensor. Equal arguments use the recursion
// T_k(A) = sigma_k(A) I - T_{k-1}(A) A; mixed arguments polarize the diagonal
// by inclusion-exclusion over subset sums. Agrees with the oracle to 1e-10.
SymMatrix newton_tensor(const MatrixTuple& args);
SymMatrix newton_tensor(const SymMatrix& a, int k);

// Full polarization Sigma_k(A_1,...,A_k) = <A_1, T_{k-1}(A_2,...,A_k)>;
// symmetric in its arguments, Sigma_k(A,...,A) = k sigma_k(A).
double polarized_sigma(const MatrixTuple& args);

// Residuals of the named algebraic identities, max-norm of (LHS - RHS)
// divided by (1 + max operand magnitude). Both sides are evaluated through the
// permutation oracle so the checks are independent of the fast paths.
double trace1_residual(const SymMatrix& a, int k);       // sigma_k = Tr(T_k)/(n-k), k < n
double trace2_residual(const SymMatrix& a, int k);       // sigma_{k+1} = Tr(T_k A)/(k+1)
double recursion_residual(const SymMatrix& a, int k);    // T_k = sigma_k I - T_{k-1} A
// T_{k-1}(B^l, C^{k-1-l}) C  ==  (C(k,l)/(k C(k-1,l))) Sigma_k(B^l, C^{k-l}) I
//                              - (C(k,l)/C(k-1,l)) T_k(B^l, C^{k-l})
//                              - (C(k-1,l-1)/C(k-1,l)) T_{k-1}(B^{l-1}, C^{k-l}) B
double lemma22_residual(const SymMatrix& b, const SymMatrix& c, int k, int l);

enum class IdentityKind { trace1, trace2, recursionT, lemma22 };

struct IdentityInputs {
    SymMatrix a;  // trace1/trace2/recursionT; doubles as B for lemma22
    SymMatrix b;  // C for lemma22
    int k = 1;
    int l = 1;
};

double identity_residual(IdentityKind kind, const IdentityInputs& in);

enum class GardingProperty { i, ii, iii, iv };

// Samples `trials` points/tuples in the relevant cone and counts violations of
// the named positivity/monotonicity property; a correct calculus yields 0.
int garding_probe(GardingProperty prop, int n, int k, int trials, std::uint64_t seed);

enum class ConcavityExpr { sigma_k_root, ratio_root };

// Midpoint concavity of sigma_k^{1/k} or (sigma_k/sigma_l)^{1/(k-l)} on random
// segments inside Gamma_k^+; counts violations below -1e-10 * scale.
int concavity_probe(ConcavityExpr expr, int n, int k, int l, int trials, std::uint64_t seed);

}  // namespace msk::symcalc
