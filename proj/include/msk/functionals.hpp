#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msk/geometry.hpp"
#include "msk/potential.hpp"

namespace msk::functionals {

using geometry::Chart;
using geometry::Grid;

// ---- test functions ---------------------------------------------------------

// Compactly supported radial bump exp(1 - 1/(1 - t^2)) with t = |u - center|/radius,
// identically zero outside the stated radius.
struct BumpFunction {
    Vec center;
    double radius = 0.0;

    double value(const Vec& u) const;
    Jet jet(const Vec& u, int order) const;  // chart-coordinate partials, order <= 3
};

struct TestFunction {
    bool constant_one = false;
    std::optional<BumpFunction> bump;
    double sign = 1.0;  // applied to the bump (phi -> -phi checks)

    static TestFunction one();
    static TestFunction bumped(Vec center, double radius);
    // Bump centered in the chart box with radius 0.35 * min half-extent.
    static TestFunction auto_bump(const Chart& chart);

    bool is_constant() const { return constant_one; }
    geometry::ScalarField field(int n) const;
    std::string label() const;
};

// Requires constant test functions only on closed surfaces and bump supports
// at least two grid cells inside the domain box; throws precondition_error.
void validate_test_function(const TestFunction& tf, const Chart& chart, const Grid& grid);

// ---- weighted curvature functionals ----------------------------------------

enum class Family { I, J, K, N };

// Pointwise coefficient u(x) = c * |grad v|^grad_pow * b(x)^b_pow.
struct Weight {
    double c = 1.0;
    int grad_pow = 0;
    int b_pow = 0;

    static Weight one() { return {}; }
    static Weight minus_one() { return {-1.0, 0, 0}; }
    static Weight grad_power(int p, double sign = 1.0) { return {sign, p, 0}; }
    static Weight normal_derivative() { return {1.0, 0, 1}; }  // u = b(x)
    std::string label() const;
};

// One member of the I/J/K/N family:
//   I_{k,l}^(u)(phi) = int Sigma_k(D2v x l, L x (k-l)) u phi
//   J_{k,l}^(u)(phi) = int <grad v, T_k(D2v x l, L x (k-l)) grad v> u phi
//   K_{k,l}^(u)(phi) = int <D2v grad v, T_{k-1}(D2v x l, L x (k-1-l)) grad v> u phi
//   N_{k,l}^(u)(phi) = int <grad phi, T_{k-1}(D2v x l, L x (k-1-l)) grad v> u
struct FunctionalSpec {
    Family family = Family::I;
    int k = 2;
    int l = 0;
    Weight weight;
    // |phi| / |grad phi| in place of phi (the estimate RHS terms).
    enum class PhiSlot { phi, abs_phi, abs_grad_phi };
    PhiSlot phi_slot = PhiSlot::phi;

    std::string label() const;
};

struct EvalOptions {
    int workers = 1;
    bool skip_cone_check = false;  // callers that already scanned
};

void validate_spec(const FunctionalSpec& spec, int n);

// Quadrature of one functional. Checks the cone hypothesis
// (Gamma_{k+1}^+, Gamma_n^+ when k = n), the |grad v| <= 1 certificate, and the
// test-function support margin.
double eval_functional(const FunctionalSpec& spec, const Chart& chart, const Grid& grid,
                       const ConvexPotential& pot, const TestFunction& testfn,
                       const EvalOptions& opts = {});

// Several functionals over one shared sweep (same chart/grid/potential/testfn).
std::vector<double> eval_functionals(const std::vector<FunctionalSpec>& specs, const Chart& chart,
                                     const Grid& grid, const ConvexPotential& pot,
                                     const TestFunction& testfn, const EvalOptions& opts = {});

// ---- decompositions ----------------------------------------------------------

enum class DecompositionKind { eq29, eq52, eq59 };

struct DecompositionParams {
    int k = 2;
    int i0 = 3;
    double a = 2.0;  // eq29 only
};

struct DecompositionResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;        // |lhs - rhs| / (1 + |lhs|)
    std::vector<double> parts;    // the weighted RHS pieces
};

// eq29 (k = 2): int sigma_2(D2v + aL) phi = 1/2 I_{2,2} + a I_{2,1} + a^2/2 I_{2,0}.
// eq52 (3 <= i0 <= k): the integration-by-parts split of I_{k,i0}(phi) into
//   (i0-1) C(k,i0-2)/(k C(k-1,i0-2)) I^{(|gv|^2)}_{k,i0-2}
// + (i0-1) C(k,i0-2)/C(k-1,i0-2)     J^{(-1)}_{k,i0-2}
// + (i0-1) C(k-1,i0-3)/C(k-1,i0-2)   K^{(-1)}_{k,i0-3}
// +                                   N^{(-1)}_{k,i0-1}.
// eq59 (i0 >= 5): the K-chain step
//   K^{(-1)}_{k,i0-3} = 1/2 I^{(|gv|^2)}_{k,i0-2} - C1 I^{(|gv|^4)}_{k,i0-4}
//                     + C2 J^{(|gv|^2)}_{k,i0-4} + C3 K^{(|gv|^2)}_{k,i0-5}
//                     + 1/2 N^{(|gv|^2)}_{k,i0-3},
// with C1 = (i0-3) C(k,i0-4) / (2k C(k-1,i0-4)),
//      C2 = (i0-3) C(k,i0-4) / (2 C(k-1,i0-4)),
//      C3 = (i0-3) C(k-1,i0-5) / (2 C(k-1,i0-4)).
DecompositionResult decomposition_residual(DecompositionKind which,
                                           const DecompositionParams& params, const Chart& chart,
                                           const Grid& grid, const ConvexPotential& pot,
                                           const TestFunction& testfn,
                                           const EvalOptions& opts = {});

// ---- inequality reports -------------------------------------------------------

struct RhsTerm {
    int m = 0;        // derivative order of phi
    double value = 0.0;  // int sigma_{k-m}(L) |grad^m phi|
};

struct InequalityReport {
    std::string surface, potential, family;
    int k = 0, l = 0;
    double a = 0.0;
    std::string grid;
    double lhs = 0.0;
    std::vector<RhsTerm> rhs_terms;
    double c_star = 0.0;
    double budget = 0.0;
    bool pass = false;
    std::map<std::string, std::string> metadata;
};

// int sigma_k(D2v + aL) phi against the k+1 derivative terms; a > 1.
// Default budget 10 (1+a)^k (heuristic envelope, recorded in metadata).
InequalityReport proposition_a_report(int k, double a, const Chart& chart, const Grid& grid,
                                      const ConvexPotential& pot, const TestFunction& testfn,
                                      const EvalOptions& opts = {},
                                      std::optional<double> budget = std::nullopt);

// (int sigma_l(L) |phi|^{(n-l)/(n-k)})^{(n-k)/(n-l)} against the same terms.
// k = n is evaluated as the p -> infinity limit of the left side, max |phi|.
InequalityReport theorem_ms_report(int k, int l, const Chart& chart, const Grid& grid,
                                   const TestFunction& testfn, const EvalOptions& opts = {},
                                   std::optional<double> budget = std::nullopt);

// ---- estimate-chain probes -----------------------------------------------------

enum class ProbeKind {
    prop_i,
    prop_j,
    prop_n,
    prop_k,
    lemma_k0_odd,
    lemma_k0_even,
    base_i0_1,
    base_i0_2,
};

struct ProbeParams {
    int k = 3;
    int l = 1;
    int i0 = 3;
    double sign = 1.0;  // the +- in the lemma weights
};

struct ProbeRecord {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;     // inequality probes
    double residual = 0.0;  // identity probes (base cases)
    bool identity = false;
    bool pass = false;
    double budget = 0.0;
};

// base_i0_1/base_i0_2: two-route identities (direct quadrature against the
// integrated-by-parts form), pass at residual <= 1e-6. The rest evaluate the
// named estimate with all constants set to 1 and report the empirical ratio
// LHS/RHS against the budget.
ProbeRecord estimate_chain_probe(ProbeKind kind, const ProbeParams& params, const Chart& chart,
                                 const Grid& grid, const ConvexPotential& pot,
                                 const TestFunction& testfn, const EvalOptions& opts = {},
                                 double budget = 100.0);

}  // namespace msk::functionals
