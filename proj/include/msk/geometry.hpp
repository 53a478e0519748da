#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "msk/chart.hpp"
#include "msk/linalg.hpp"
#include "msk/potential.hpp"

namespace msk::geometry {

// Pointwise first/second fundamental data in an orthonormal tangent frame.
// The frame is the symmetric orthonormalization of the coordinate tangents:
// e_a = sum_i P_{ia} X_i with P = g^{-1/2}, so coordinate tensors push to the
// frame by contracting each index with P.
struct FramePoint {
    int n = 0;
    Vec u;                  // chart coordinates
    Vec x;                  // ambient position
    Matrix d1;              // (n+1) x n coordinate tangents (columns)
    SymMatrix g, ginv;      // first fundamental form and inverse
    SymMatrix push;         // P = g^{-1/2}
    Vec normal;             // inner unit normal
    SymMatrix second_form;  // II in coordinates
    SymMatrix shape_frame;  // L = P II P (second fundamental form, frame)
    double area = 0.0;      // sqrt(det g)
    Tensor3 christoffel;    // Gamma^m_{ij}, indexed (m, i, j)

    Vec frame_vector(int a) const;  // ambient components of e_a
};

FramePoint frame_at(const Chart& chart, const Vec& u);
FramePoint frame_from_jets(const Chart& chart, const Vec& u, const ChartJets& j);

// Second fundamental form expressed in the frame built by modified
// Gram-Schmidt over the coordinate tangents taken in `order` (a permutation of
// 0..n-1). sigma_k of the result is frame-independent.
SymMatrix second_form_gram_schmidt(const Chart& chart, const Vec& u,
                                   const std::vector<int>& order);

// Scalar function of the chart coordinates with derivatives through
// `max_order` available as jets.
struct ScalarField {
    std::function<Jet(const Vec&, int)> jet;  // (u, order)
    int max_order = 0;
    bool is_zero = false;
};

ScalarField constant_field(double c);
// v = V-bar o X, the potential restricted to the chart.
ScalarField restrict_potential(const Chart& chart, const functionals::ConvexPotential& pot);

// Covariant Hessian of the field in the orthonormal frame:
// (D^2 f)_ij = d2 f - Gamma^m_ij d_m f, pushed by P.
SymMatrix covariant_hessian(const Chart& chart, const ScalarField& f, const Vec& u);

// Covariant derivatives of a field through `order` (<= 4) in the frame.
// Orders <= 3 are analytic; order 4 finite-differences the exact third
// covariant derivative field before Christoffel correction.
struct CovariantDerivs {
    int order = 0;
    double value = 0.0;
    Vec grad;         // frame
    SymMatrix hess;   // frame
    Tensor3 third;    // frame
    Tensor4 fourth;   // frame
    double norm(int m) const;  // Frobenius norm of the m-th derivative; norm(0) = |value|
};

CovariantDerivs covariant_derivatives(const Chart& chart, const ScalarField& f, const Vec& u,
                                      int order);

// Restriction data of a potential at a frame point: v, its frame gradient and
// covariant Hessian, and the normal derivative b = <grad V-bar, normal>.
struct RestrictionData {
    double v = 0.0;
    Vec grad_frame;
    double grad_norm = 0.0;
    SymMatrix hess_frame;
    double b = 0.0;
};

RestrictionData restriction_data(const Chart& chart, const functionals::ConvexPotential& pot,
                                 const FramePoint& fp);

// Max-norm residual of D^2 v = tangential D-bar^2 V-bar + b L at u,
// normalized by 1 + operand scale.
double restriction_hessian_residual(const Chart& chart,
                                    const functionals::ConvexPotential& pot, const Vec& u);

// Total-symmetry defect of the covariant derivative of the second fundamental
// form, max |L_{ij,k} - L_{ik,j}| normalized.
double codazzi_residual(const Chart& chart, const Vec& u);

// Max-norm defect of R_{ijkl} = L_ik L_jl - L_il L_jk with the Riemann tensor
// computed independently from the metric connection.
double gauss_residual(const Chart& chart, const Vec& u);

// Covariant divergence residual of the Newton tensor field
// T_k(D^2v x m, L x (k-m)). m = 0 checks div T_k(L) = 0; m >= 1 checks
// div T_k = -m T_k(D^2v x (m-1), L x (k-m+1)) L grad v.
struct DivergenceResidual {
    Vec residual_frame;
    double scale = 0.0;
    double max_normalized = 0.0;
};

DivergenceResidual div_newton_residual(const Chart& chart, const Vec& u, int k, int m,
                                       const functionals::ConvexPotential* pot = nullptr);

// Quadrature of integrand(FramePoint) against the surface measure:
// sum over nodes of cell_weight * sqrt(det g) * integrand, accumulated in
// fixed node order with compensated summation.
double integrate(const Chart& chart, const Grid& grid,
                 const std::function<double(const FramePoint&)>& integrand);

// Shared-frame multi-integrand sweep. `eval` fills `out` (size nfns) with the
// integrand values at one node; results are reduced per function in fixed node
// order, so they do not depend on the worker count.
std::vector<double> integrate_many(
    const Chart& chart, const Grid& grid, int nfns,
    const std::function<void(std::size_t, const FramePoint&, std::vector<double>&)>& eval,
    int workers = 1);

struct KConvexity {
    bool pass = false;
    int cone_order = 0;
    double worst_margin = 0.0;
    Vec worst_node;
    int worst_sigma_order = 0;
};

// Evaluates cone membership of L at every grid node. k <= n-1 tests
// Gamma_{k+1}^+, k = n tests Gamma_n^+.
KConvexity kconvexity_scan(const Chart& chart, const Grid& grid, int k);
// Explicit cone order variant (the k = 1 Michael-Simon case needs Gamma_1).
KConvexity cone_scan(const Chart& chart, const Grid& grid, int cone_order);

}  // namespace msk::geometry
