#include "msk/potential.hpp"

#include <cmath>
#include <sstream>

#include "msk/rng.hpp"

namespace msk::functionals {

Vec ConvexPotential::gradient(const Vec& x) const {
    const Jet j = jet(x, 1);
    Vec g(ambient_dim);
    for (int i = 0; i < ambient_dim; ++i) g[i] = j.d1(i);
    return g;
}

SymMatrix ConvexPotential::hessian(const Vec& x) const {
    const Jet j = jet(x, 2);
    SymMatrix h(ambient_dim);
    for (int i = 0; i < ambient_dim; ++i)
        for (int k = i; k < ambient_dim; ++k) h.set(i, k, 0.5 * (j.d2(i, k) + j.d2(k, i)));
    return h;
}

ConvexPotential make_zero_potential(int ambient_dim) {
    ConvexPotential p;
    p.id = "zero";
    p.ambient_dim = ambient_dim;
    p.gradient_bound_certified = true;
    p.is_zero = true;
    p.formula = [](std::span<const Jet> x) {
        return Jet::constant(x[0].nvars(), x[0].order(), 0.0);
    };
    return p;
}

ConvexPotential make_linear_potential(int ambient_dim, double c, int axis) {
    if (std::abs(c) > 1.0) throw domain_error("linear potential: |c| must be <= 1");
    if (axis < 0 || axis >= ambient_dim - 1)
        throw domain_error("linear potential: axis must lie in the plane E");
    ConvexPotential p;
    std::ostringstream id;
    id << "linear:c=" << c;
    p.id = id.str();
    p.ambient_dim = ambient_dim;
    p.gradient_bound_certified = true;
    p.formula = [c, axis](std::span<const Jet> x) { return x[axis] * c; };
    return p;
}

ConvexPotential make_smoothed_distance_potential(int ambient_dim, double eps) {
    if (!(eps > 0.0)) throw domain_error("smoothed-distance potential: eps must be positive");
    ConvexPotential p;
    std::ostringstream id;
    id << "smoothed-distance:eps=" << eps;
    p.id = id.str();
    p.ambient_dim = ambient_dim;
    p.gradient_bound_certified = true;  // |grad| = |y - y0| / sqrt(eps^2 + |y - y0|^2) < 1
    const int nplane = ambient_dim - 1;
    p.formula = [eps, nplane](std::span<const Jet> x) {
        Jet s = Jet::constant(x[0].nvars(), x[0].order(), eps * eps);
        for (int i = 0; i < nplane; ++i) {
            const Jet d = x[i] - (i == 0 ? 0.2 : 0.0);
            s += d * d;
        }
        return sqrt(s) - eps;
    };
    return p;
}

ConvexPotential make_log_sum_exp_potential(int ambient_dim, double beta) {
    if (!(beta > 0.0)) throw domain_error("log-sum-exp potential: beta must be positive");
    ConvexPotential p;
    std::ostringstream id;
    id << "log-sum-exp:beta=" << beta;
    p.id = id.str();
    p.ambient_dim = ambient_dim;
    p.gradient_bound_certified = true;  // gradient is a convex mix of the +-0.9 e_i
    const int nplane = ambient_dim - 1;
    p.formula = [beta, nplane](std::span<const Jet> x) {
        Jet s = Jet::constant(x[0].nvars(), x[0].order(), 0.0);
        for (int i = 0; i < nplane; ++i) {
            s += exp(x[i] * (0.9 * beta));
            s += exp(x[i] * (-0.9 * beta));
        }
        return log(s) / beta;
    };
    return p;
}

ConvexPotential make_ambient_quadratic_potential(int ambient_dim) {
    ConvexPotential p;
    p.id = "ambient-quadratic";
    p.ambient_dim = ambient_dim;
    p.gradient_bound_certified = false;
    p.formula = [ambient_dim](std::span<const Jet> x) {
        Jet s = Jet::constant(x[0].nvars(), x[0].order(), 0.0);
        for (int i = 0; i < ambient_dim; ++i) s += x[i] * x[i];
        return s * 0.5;
    };
    return p;
}

namespace {

double field_or(const std::string& id, const std::string& key, double fallback) {
    const std::string pfx = key + "=";
    std::istringstream ss(id);
    std::string part;
    std::getline(ss, part, ':');  // kind
    while (std::getline(ss, part, ':'))
        if (part.rfind(pfx, 0) == 0) return std::stod(part.substr(pfx.size()));
    return fallback;
}

}  // namespace

ConvexPotential potential_from_id(const std::string& id, int ambient_dim) {
    const std::string kind = id.substr(0, id.find(':'));
    if (kind == "zero") return make_zero_potential(ambient_dim);
    if (kind == "linear")
        return make_linear_potential(ambient_dim, field_or(id, "c", 0.5));
    if (kind == "smoothed-distance")
        return make_smoothed_distance_potential(ambient_dim, field_or(id, "eps", 0.5));
    if (kind == "log-sum-exp")
        return make_log_sum_exp_potential(ambient_dim, field_or(id, "beta", 2.0));
    if (kind == "ambient-quadratic") return make_ambient_quadratic_potential(ambient_dim);
    throw validation_error("potential id: unknown potential '" + id + "'");
}

std::vector<std::string> catalog_potential_ids() {
    return {"zero", "linear:c=0.5", "smoothed-distance:eps=0.5", "log-sum-exp:beta=2",
            "ambient-quadratic"};
}

void validate_potential(const ConvexPotential& pot, std::uint64_t seed, int samples) {
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        Vec x(pot.ambient_dim);
        for (double& v : x) v = 1.5 * rng.normal();
        const SymMatrix h = pot.hessian(x);
        if (min_eigenvalue(h) < -1e-10)
            throw validation_error("potential '" + pot.id + "': Hessian not PSD at a sample");
        if (pot.gradient_bound_certified && norm2(pot.gradient(x)) > 1.0 + 1e-12)
            throw validation_error("potential '" + pot.id + "': gradient bound violated");
    }
}

}  // namespace msk::functionals
