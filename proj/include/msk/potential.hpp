#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msk/jets.hpp"
#include "msk/linalg.hpp"

namespace msk::functionals {

// Convex function on an n-dimensional plane E inside R^{n+1}, carried around
// as its extension V-bar = V o p (p the orthogonal projection onto E) written
// as a jet formula over ambient coordinates. E is the span of the first n
// coordinate axes for every catalog entry.
//
// gradient_bound_certified marks the |grad V| <= 1 certificate that the
// inequality functionals require; entries without it (the ambient quadratic)
// are reserved for curvature-identity checks.
struct ConvexPotential {
    std::string id;
    int ambient_dim = 0;
    JetFn formula;
    bool gradient_bound_certified = false;
    bool is_zero = false;

    Jet jet(const Vec& x, int order) const { return eval_jet(formula, x, order); }
    double value(const Vec& x) const { return jet(x, 0).value(); }
    Vec gradient(const Vec& x) const;
    SymMatrix hessian(const Vec& x) const;
};

ConvexPotential make_zero_potential(int ambient_dim);
// c <a, p(x)> with a a unit direction in E; requires |c| <= 1.
ConvexPotential make_linear_potential(int ambient_dim, double c, int axis = 0);
// sqrt(eps^2 + |p(x) - y0|^2) - eps; |grad| < 1 always.
ConvexPotential make_smoothed_distance_potential(int ambient_dim, double eps);
// (1/beta) log sum exp(beta <a_i, p(x)>) over directions +-0.9 e_i.
ConvexPotential make_log_sum_exp_potential(int ambient_dim, double beta);
// |x|^2 / 2 on all of R^{n+1}; not gradient-bound certified (identity checks only).
ConvexPotential make_ambient_quadratic_potential(int ambient_dim);

// "zero", "linear", "linear:c=0.5", "smoothed-distance:eps=0.5",
// "log-sum-exp:beta=2", "ambient-quadratic".
ConvexPotential potential_from_id(const std::string& id, int ambient_dim);
std::vector<std::string> catalog_potential_ids();

// Samples ambient points and checks Hessian positive semidefiniteness
// (smallest eigenvalue >= -1e-10) and, when certified, |grad| <= 1 + 1e-12.
// Throws validation_error on a violation.
void validate_potential(const ConvexPotential& pot, std::uint64_t seed, int samples = 1000);

}  // namespace msk::functionals
