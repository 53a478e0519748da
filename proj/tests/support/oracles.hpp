#pragma once

#include <cstdint>
#include <functional>

#include "msk/linalg.hpp"

// Independent brute-force references used only by tests.
namespace msk::testsupport {

// sigma_k(A) as the sum of all k x k principal minors (subset enumeration +
// LU determinants). Exponential cost; n <= 8.
double sigma_principal_minors(const SymMatrix& a, int k);

// sigma_k(lambda) by literal k-subset enumeration of products.
double sigma_subsets(const Vec& lambda, int k);

// Central-difference gradient check helper: max |fd - analytic| over coords.
double gradient_fd_error(const std::function<double(const Vec&)>& f, const Vec& x,
                         const Vec& analytic_grad, double h);

}  // namespace msk::testsupport
