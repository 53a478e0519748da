#include "support/oracles.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace msk::testsupport {

namespace {

void subsets(int n, int k, int start, std::vector<int>& cur,
             const std::function<void(const std::vector<int>&)>& visit) {
    if (static_cast<int>(cur.size()) == k) {
        visit(cur);
        return;
    }
    for (int i = start; i < n; ++i) {
        cur.push_back(i);
        subsets(n, k, i + 1, cur, visit);
        cur.pop_back();
    }
}

}  // namespace

double sigma_principal_minors(const SymMatrix& a, int k) {
    if (k == 0) return 1.0;
    const int n = a.dim();
    double total = 0.0;
    std::vector<int> cur;
    subsets(n, k, 0, cur, [&](const std::vector<int>& s) {
        Matrix minor(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) minor(i, j) = a(s[i], s[j]);
        total += determinant(minor);
    });
    return total;
}

double sigma_subsets(const Vec& lambda, int k) {
    if (k == 0) return 1.0;
    const int n = static_cast<int>(lambda.size());
    double total = 0.0;
    std::vector<int> cur;
    subsets(n, k, 0, cur, [&](const std::vector<int>& s) {
        double p = 1.0;
        for (int i : s) p *= lambda[i];
        total += p;
    });
    return total;
}

double gradient_fd_error(const std::function<double(const Vec&)>& f, const Vec& x,
                         const Vec& analytic_grad, double h) {
    double worst = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        Vec up = x, dn = x;
        up[i] += h;
        dn[i] -= h;
        const double fd = (f(up) - f(dn)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - analytic_grad[i]));
    }
    return worst;
}

}  // namespace msk::testsupport
