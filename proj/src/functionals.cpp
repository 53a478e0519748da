#include "msk/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msk/symcalc.hpp"

namespace msk::functionals {

using geometry::CovariantDerivs;
using geometry::FramePoint;
using geometry::RestrictionData;
using geometry::ScalarField;
using geometry::Topology;
using symcalc::MatrixTuple;

// ---- test functions ---------------------------------------------------------

namespace {

// Radial profile F(s) = exp(1 - 1/(1-s)) on s = t^2 < 1, zero outside.
Jet bump_profile(const Jet& s) {
    // w = 1/(1-s); F = exp(1-w); chain through order 3:
    // F' = -w^2 F, F'' = (w^4 - 2w^3) F, F''' = (-w^6 + 6w^5 - 6w^4) F.
    const double sv = s.value();
    const double w = 1.0 / (1.0 - sv);
    const double f = std::exp(1.0 - w);
    const double w2 = w * w, w3 = w2 * w, w4 = w3 * w, w5 = w4 * w, w6 = w5 * w;
    return Jet::compose(s, f, -w2 * f, (w4 - 2.0 * w3) * f, (-w6 + 6.0 * w5 - 6.0 * w4) * f);
}

}  // namespace

double BumpFunction::value(const Vec& u) const {
    double s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        const double d = (u[i] - center[i]) / radius;
        s += d * d;
    }
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s));
}

Jet BumpFunction::jet(const Vec& u, int order) const {
    const int n = static_cast<int>(u.size());
    double sv = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = (u[i] - center[i]) / radius;
        sv += d * d;
    }
    if (sv >= 1.0 - 1e-13) return Jet::constant(n, order, 0.0);
    Jet s = Jet::constant(n, order, 0.0);
    for (int i = 0; i < n; ++i) {
        const Jet d = (Jet::variable(n, order, i, u[i]) - center[i]) / radius;
        s += d * d;
    }
    return bump_profile(s);
}

TestFunction TestFunction::one() {
    TestFunction t;
    t.constant_one = true;
    return t;
}

TestFunction TestFunction::bumped(Vec center, double radius) {
    TestFunction t;
    t.bump = BumpFunction{std::move(center), radius};
    return t;
}

TestFunction TestFunction::auto_bump(const Chart& chart) {
    Vec center(chart.n);
    double half = 1e300;
    for (int i = 0; i < chart.n; ++i) {
        center[i] = 0.5 * (chart.domain.lo[i] + chart.domain.hi[i]);
        half = std::min(half, 0.5 * (chart.domain.hi[i] - chart.domain.lo[i]));
    }
    return bumped(std::move(center), 0.35 * half);
}

ScalarField TestFunction::field([[maybe_unused]] int n) const {
    if (constant_one) return geometry::constant_field(1.0);
    const BumpFunction b = *bump;
    const double sgn = sign;
    ScalarField f;
    f.max_order = 4;  // order 4 goes through the covariant FD path
    f.jet = [b, sgn](const Vec& u, int order) {
        Jet j = b.jet(u, std::min(order, 3));
        j *= sgn;
        return j;
    };
    return f;
}

std::string TestFunction::label() const {
    if (constant_one) return "one";
    std::ostringstream os;
    os << (sign < 0 ? "-" : "") << "bump:r=" << bump->radius;
    return os.str();
}

void validate_test_function(const TestFunction& tf, const Chart& chart, const Grid& grid) {
    if (tf.constant_one) {
        if (chart.topology != Topology::closed_sphere)
            throw precondition_error("testfn",
                                     "constant test function requires a closed surface");
        return;
    }
    const BumpFunction& b = *tf.bump;
    for (int i = 0; i < chart.n; ++i) {
        const double cell = (chart.domain.hi[i] - chart.domain.lo[i]) /
                            static_cast<double>(grid.axis_nodes[i].size());
        if (b.center[i] - b.radius < chart.domain.lo[i] + 2.0 * cell ||
            b.center[i] + b.radius > chart.domain.hi[i] - 2.0 * cell)
            throw precondition_error(
                "testfn", "bump support must stay two grid cells inside the domain (axis " +
                              std::to_string(i) + ")");
    }
}

// ---- functional evaluation ---------------------------------------------------

std::string Weight::label() const {
    std::ostringstream os;
    os << c;
    if (grad_pow) os << "*|gv|^" << grad_pow;
    if (b_pow) os << "*b^" << b_pow;
    return os.str();
}

std::string FunctionalSpec::label() const {
    static const char* names[] = {"I", "J", "K", "N"};
    std::ostringstream os;
    os << names[static_cast<int>(family)] << "_{" << k << "," << l << "}^(" << weight.label()
       << ")";
    return os.str();
}

void validate_spec(const FunctionalSpec& spec, int n) {
    const int k = spec.k, l = spec.l;
    if (k < 1 || k > n) throw domain_error("functional: requires 1 <= k <= n");
    switch (spec.family) {
        case Family::I:
        case Family::J:
            if (l < 0 || l > k) throw domain_error(spec.label() + ": requires 0 <= l <= k");
            break;
        case Family::K:
        case Family::N:
            if (l < 0 || l > k - 1)
                throw domain_error(spec.label() + ": requires 0 <= l <= k-1");
            break;
    }
}

namespace {

struct NodeData {
    const FramePoint& fp;
    const RestrictionData& rd;
    double phi;           // signed test function value
    const Vec& grad_phi;  // frame gradient of phi
    double grad_phi_norm;
};

using Integrand = std::function<double(const NodeData&)>;

double weight_value(const RestrictionData& rd, const Weight& w) {
    double v = w.c;
    for (int p = 0; p < w.grad_pow; ++p) v *= rd.grad_norm;
    for (int p = 0; p < w.b_pow; ++p) v *= rd.b;
    return v;
}

SymMatrix mixed_newton(const SymMatrix& h, const SymMatrix& l, int slots_h, int count) {
    if (count == 0) return SymMatrix::identity(h.dim());
    std::vector<SymMatrix> args;
    args.insert(args.end(), slots_h, h);
    args.insert(args.end(), count - slots_h, l);
    return symcalc::newton_tensor(MatrixTuple(std::move(args)));
}

double sigma_mixed(const SymMatrix& h, const SymMatrix& l, int slots_h, int k) {
    // Sigma_k with slots_h copies of h: contract one slot against T_{k-1} of
    // the rest (argument order is immaterial).
    const SymMatrix& first = slots_h > 0 ? h : l;
    const SymMatrix t = mixed_newton(h, l, slots_h > 0 ? slots_h - 1 : 0, k - 1);
    double s = 0.0;
    for (int i = 0; i < h.dim(); ++i)
        for (int j = 0; j < h.dim(); ++j) s += first(i, j) * t(i, j);
    return s;
}

double quadratic_form(const SymMatrix& t, const Vec& x, const Vec& y) {
    double s = 0.0;
    for (int i = 0; i < t.dim(); ++i)
        for (int j = 0; j < t.dim(); ++j) s += x[i] * t(i, j) * y[j];
    return s;
}

double phi_slot_value(const NodeData& nd, FunctionalSpec::PhiSlot slot) {
    switch (slot) {
        case FunctionalSpec::PhiSlot::phi: return nd.phi;
        case FunctionalSpec::PhiSlot::abs_phi: return std::abs(nd.phi);
        case FunctionalSpec::PhiSlot::abs_grad_phi: return nd.grad_phi_norm;
    }
    return 0.0;
}

Integrand family_integrand(const FunctionalSpec& spec) {
    return [spec](const NodeData& nd) {
        const SymMatrix& lhat = nd.fp.shape_frame;
        const SymMatrix& hhat = nd.rd.hess_frame;
        const double u = weight_value(nd.rd, spec.weight);
        const double ph = phi_slot_value(nd, spec.phi_slot);
        switch (spec.family) {
            case Family::I:
                if (u == 0.0 || ph == 0.0) return 0.0;
                return sigma_mixed(hhat, lhat, spec.l, spec.k) * u * ph;
            case Family::J: {
                if (u == 0.0 || ph == 0.0) return 0.0;
                const SymMatrix t = mixed_newton(hhat, lhat, spec.l, spec.k);
                return quadratic_form(t, nd.rd.grad_frame, nd.rd.grad_frame) * u * ph;
            }
            case Family::K: {
                if (u == 0.0 || ph == 0.0) return 0.0;
                const SymMatrix t = mixed_newton(hhat, lhat, spec.l, spec.k - 1);
                const Vec hv = hhat.mat().apply(nd.rd.grad_frame);
                return quadratic_form(t, hv, nd.rd.grad_frame) * u * ph;
            }
            case Family::N: {
                if (u == 0.0) return 0.0;
                const SymMatrix t = mixed_newton(hhat, lhat, spec.l, spec.k - 1);
                return quadratic_form(t, nd.grad_phi, nd.rd.grad_frame) * u;
            }
        }
        return 0.0;
    };
}

// Shared sweep: frame + restriction + test-function data once per node.
std::vector<double> sweep(const std::vector<Integrand>& fns, const Chart& chart, const Grid& grid,
                          const ConvexPotential& pot, const TestFunction& testfn,
                          const EvalOptions& opts) {
    const int n = chart.n;
    const ScalarField phi_field = testfn.field(n);
    const bool need_phi_grad = !testfn.is_constant();
    return geometry::integrate_many(
        chart, grid, static_cast<int>(fns.size()),
        [&](std::size_t, const FramePoint& fp, std::vector<double>& out) {
            const RestrictionData rd = geometry::restriction_data(chart, pot, fp);
            if (pot.gradient_bound_certified && rd.grad_norm > 1.0 + 1e-8)
                throw precondition_error("grad-bound", "|grad v| exceeds 1 at a node");
            double phi = testfn.is_constant() ? 1.0 : 0.0;
            Vec grad_phi(n, 0.0);
            if (need_phi_grad) {
                const Jet pj = phi_field.jet(fp.u, 1);
                phi = pj.value();
                for (int a = 0; a < n; ++a)
                    for (int i = 0; i < n; ++i) grad_phi[a] += pj.d1(i) * fp.push(i, a);
            }
            const NodeData nd{fp, rd, phi, grad_phi, norm2(grad_phi)};
            for (size_t f = 0; f < fns.size(); ++f) out[f] = fns[f](nd);
        },
        opts.workers);
}

int hypothesis_cone_order(int k, int n) { return std::min(k + 1, n); }

void require_cone(const Chart& chart, const Grid& grid, int cone_order) {
    const geometry::KConvexity scan = geometry::cone_scan(chart, grid, cone_order);
    if (!scan.pass) {
        std::ostringstream os;
        os << "kconvexity: " << chart.id << " fails Gamma_" << cone_order
           << "+ (sigma_" << scan.worst_sigma_order << " margin " << scan.worst_margin
           << " at node (";
        for (size_t i = 0; i < scan.worst_node.size(); ++i)
            os << (i ? "," : "") << scan.worst_node[i];
        os << "))";
        throw precondition_error("kconvexity", os.str());
    }
}

void require_certified(const ConvexPotential& pot) {
    if (!pot.gradient_bound_certified)
        throw precondition_error("grad-bound", "potential '" + pot.id +
                                                   "' carries no |grad V| <= 1 certificate");
}

}  // namespace

std::vector<double> eval_functionals(const std::vector<FunctionalSpec>& specs, const Chart& chart,
                                     const Grid& grid, const ConvexPotential& pot,
                                     const TestFunction& testfn, const EvalOptions& opts) {
    int kmax = 1;
    for (const auto& s : specs) {
        validate_spec(s, chart.n);
        kmax = std::max(kmax, s.k);
    }
    require_certified(pot);
    validate_test_function(testfn, chart, grid);
    if (!opts.skip_cone_check) require_cone(chart, grid, hypothesis_cone_order(kmax, chart.n));

    std::vector<Integrand> fns;
    fns.reserve(specs.size());
    for (const auto& s : specs) fns.push_back(family_integrand(s));
    return sweep(fns, chart, grid, pot, testfn, opts);
}

double eval_functional(const FunctionalSpec& spec, const Chart& chart, const Grid& grid,
                       const ConvexPotential& pot, const TestFunction& testfn,
                       const EvalOptions& opts) {
    return eval_functionals({spec}, chart, grid, pot, testfn, opts)[0];
}

// ---- decompositions ----------------------------------------------------------

DecompositionResult decomposition_residual(DecompositionKind which,
                                           const DecompositionParams& params, const Chart& chart,
                                           const Grid& grid, const ConvexPotential& pot,
                                           const TestFunction& testfn, const EvalOptions& opts) {
    const int k = params.k, i0 = params.i0;
    const int n = chart.n;
    DecompositionResult out;

    if (which == DecompositionKind::eq29) {
        if (k != 2) throw domain_error("eq29: requires k = 2");
        if (n < 2) throw domain_error("eq29: requires n >= 2");
        const double a = params.a;
        require_certified(pot);
        validate_test_function(testfn, chart, grid);
        require_cone(chart, grid, hypothesis_cone_order(2, n));

        std::vector<Integrand> fns;
        fns.push_back([a](const NodeData& nd) {
            const SymMatrix m = nd.rd.hess_frame + nd.fp.shape_frame.scaled(a);
            return symcalc::sigma_matrix(m, 2) * nd.phi;
        });
        for (int l = 2; l >= 0; --l) {
            FunctionalSpec s{Family::I, 2, l, Weight::one(), FunctionalSpec::PhiSlot::phi};
            fns.push_back(family_integrand(s));
        }
        const std::vector<double> vals = sweep(fns, chart, grid, pot, testfn, opts);
        out.lhs = vals[0];
        out.parts = {0.5 * vals[1], a * vals[2], 0.5 * a * a * vals[3]};
        out.rhs = out.parts[0] + out.parts[1] + out.parts[2];
    } else if (which == DecompositionKind::eq52) {
        if (i0 < 3 || i0 > k) throw domain_error("eq52: requires 3 <= i0 <= k");
        const double c_i = static_cast<double>(binomial(k, i0 - 2));
        const double c_low = static_cast<double>(binomial(k - 1, i0 - 2));
        const double c_k3 = static_cast<double>(binomial(k - 1, i0 - 3));
        const std::vector<FunctionalSpec> specs = {
            {Family::I, k, i0, Weight::one(), FunctionalSpec::PhiSlot::phi},
            {Family::I, k, i0 - 2, Weight::grad_power(2), FunctionalSpec::PhiSlot::phi},
            {Family::J, k, i0 - 2, Weight::minus_one(), FunctionalSpec::PhiSlot::phi},
            {Family::K, k, i0 - 3, Weight::minus_one(), FunctionalSpec::PhiSlot::phi},
            {Family::N, k, i0 - 1, Weight::minus_one(), FunctionalSpec::PhiSlot::phi},
        };
        const std::vector<double> vals = eval_functionals(specs, chart, grid, pot, testfn, opts);
        out.lhs = vals[0];
        out.parts = {(i0 - 1) * c_i / (k * c_low) * vals[1], (i0 - 1) * c_i / c_low * vals[2],
                     (i0 - 1) * c_k3 / c_low * vals[3], vals[4]};
        out.rhs = out.parts[0] + out.parts[1] + out.parts[2] + out.parts[3];
    } else {
        if (i0 < 5) throw domain_error("eq59: requires i0 >= 5");
        if (i0 > k + 2) throw domain_error("eq59: requires i0 <= k+2 (slot bounds)");
        const double c1 = (i0 - 3) * binomial(k, i0 - 4) / (2.0 * k * binomial(k - 1, i0 - 4));
        const double c2 = (i0 - 3) * binomial(k, i0 - 4) / (2.0 * binomial(k - 1, i0 - 4));
        const double c3 = (i0 - 3) * binomial(k - 1, i0 - 5) / (2.0 * binomial(k - 1, i0 - 4));
        const std::vector<FunctionalSpec> specs = {
            {Family::K, k, i0 - 3, Weight::minus_one(), FunctionalSpec::PhiSlot::phi},
            {Family::I, k, i0 - 2, Weight::grad_power(2), FunctionalSpec::PhiSlot::phi},
            {Family::I, k, i0 - 4, Weight::grad_power(4), FunctionalSpec::PhiSlot::phi},
            {Family::J, k, i0 - 4, Weight::grad_power(2), FunctionalSpec::PhiSlot::phi},
            {Family::K, k, i0 - 5, Weight::grad_power(2), FunctionalSpec::PhiSlot::phi},
            {Family::N, k, i0 - 3, Weight::grad_power(2), FunctionalSpec::PhiSlot::phi},
        };
        const std::vector<double> vals = eval_functionals(specs, chart, grid, pot, testfn, opts);
        out.lhs = vals[0];
        out.parts = {0.5 * vals[1], -c1 * vals[2], c2 * vals[3], c3 * vals[4], 0.5 * vals[5]};
        out.rhs = out.parts[0] + out.parts[1] + out.parts[2] + out.parts[3] + out.parts[4];
    }
    out.residual = std::abs(out.lhs - out.rhs) / (1.0 + std::abs(out.lhs));
    return out;
}

// ---- inequality reports --------------------------------------------------------

namespace {

// int sigma_{k-m}(L) |grad^m phi| for m = 0..k. Constant phi contributes only
// the m = 0 term. Orders >= 3 recompute the curvature jet per node, which is
// fine at the patch grids these reports run on.
std::vector<RhsTerm> rhs_derivative_terms(int k, const Chart& chart, const Grid& grid,
                                          const TestFunction& testfn, const EvalOptions& opts) {
    const int n = chart.n;
    std::vector<RhsTerm> terms(k + 1);
    for (int m = 0; m <= k; ++m) terms[m].m = m;

    if (testfn.is_constant()) {
        terms[0].value = geometry::integrate(chart, grid, [&](const FramePoint& fp) {
            return symcalc::sigma_matrix(fp.shape_frame, k);
        });
        return terms;
    }

    const ScalarField phi = testfn.field(n);
    const int order = k;
    std::vector<double> vals = geometry::integrate_many(
        chart, grid, k + 1,
        [&](std::size_t, const FramePoint& fp, std::vector<double>& out) {
            const CovariantDerivs cd =
                geometry::covariant_derivatives(chart, phi, fp.u, std::min(order, 4));
            for (int m = 0; m <= k; ++m) {
                const double nrm = cd.norm(std::min(m, 4));
                if (nrm == 0.0) {
                    out[m] = 0.0;
                    continue;
                }
                const double sig =
                    (k - m == 0) ? 1.0 : symcalc::sigma_matrix(fp.shape_frame, k - m);
                out[m] = sig * nrm;
            }
        },
        opts.workers);
    for (int m = 0; m <= k; ++m) terms[m].value = vals[m];
    return terms;
}

double rhs_total(const std::vector<RhsTerm>& terms) {
    double s = 0.0;
    for (const auto& t : terms) s += t.value;
    return s;
}

}  // namespace

InequalityReport proposition_a_report(int k, double a, const Chart& chart, const Grid& grid,
                                      const ConvexPotential& pot, const TestFunction& testfn,
                                      const EvalOptions& opts, std::optional<double> budget) {
    const int n = chart.n;
    if (!(a > 1.0)) throw domain_error("proposition_a: requires a > 1");
    if (k < 1 || k > n) throw domain_error("proposition_a: requires 1 <= k <= n");
    require_certified(pot);
    validate_test_function(testfn, chart, grid);
    require_cone(chart, grid, hypothesis_cone_order(k, n));

    InequalityReport rep;
    rep.surface = chart.id;
    rep.potential = pot.id;
    rep.family = "prop_a";
    rep.k = k;
    rep.l = 0;
    rep.a = a;
    rep.grid = grid.counts_string();
    rep.budget = budget.value_or(10.0 * std::pow(1.0 + a, k));
    rep.metadata["phi"] = testfn.label();
    rep.metadata["derivative_norm"] = "frobenius";
    rep.metadata["budget_rule"] = budget ? "explicit" : "10*(1+a)^k";

    std::vector<Integrand> fns;
    fns.push_back([k, a](const NodeData& nd) {
        const SymMatrix m = nd.rd.hess_frame + nd.fp.shape_frame.scaled(a);
        return symcalc::sigma_matrix(m, k) * nd.phi;
    });
    rep.lhs = sweep(fns, chart, grid, pot, testfn, opts)[0];
    rep.rhs_terms = rhs_derivative_terms(k, chart, grid, testfn, opts);

    const double total = rhs_total(rep.rhs_terms);
    rep.c_star = rep.lhs / total;
    rep.pass = std::isfinite(rep.c_star) && rep.c_star <= rep.budget;
    return rep;
}

InequalityReport theorem_ms_report(int k, int l, const Chart& chart, const Grid& grid,
                                   const TestFunction& testfn, const EvalOptions& opts,
                                   std::optional<double> budget) {
    const int n = chart.n;
    const bool valid = (k >= 2 && k <= n - 1 && l >= 1 && l <= k - 1) ||
                       (k == n && l >= 1 && l <= n - 1) || (k == 1 && l == 0);
    if (k == n && l == n) throw domain_error("theorem_ms: k = n with l = n degenerates (zero exponent)");
    if (!valid) throw domain_error("theorem_ms: invalid (k, l) for this dimension");
    validate_test_function(testfn, chart, grid);
    require_cone(chart, grid, k == 1 ? 1 : hypothesis_cone_order(k, n));

    InequalityReport rep;
    rep.surface = chart.id;
    rep.potential = "";
    rep.family = "theorem_ms";
    rep.k = k;
    rep.l = l;
    rep.grid = grid.counts_string();
    rep.budget = budget.value_or(10.0);
    rep.metadata["phi"] = testfn.label();
    rep.metadata["derivative_norm"] = "frobenius";
    rep.metadata["middle_terms"] = "sigma_{k-m}(L) |grad^m phi|";

    const ScalarField phi = testfn.field(n);
    if (k == n) {
        // p -> infinity limit of (int sigma_l |phi|^p)^{1/p}: sup |phi| on the
        // support (sigma_l > 0 under the cone hypothesis).
        double sup = testfn.is_constant() ? 1.0 : 0.0;
        if (!testfn.is_constant()) {
            const std::size_t nn = grid.size();
            for (std::size_t i = 0; i < nn; ++i)
                sup = std::max(sup, std::abs(phi.jet(grid.node(i), 0).value()));
        }
        rep.lhs = sup;
        rep.metadata["k_eq_n_reading"] = "lhs = max |phi| (p->inf limit)";
    } else {
        const double p = static_cast<double>(n - l) / (n - k);
        const double raw = geometry::integrate(chart, grid, [&](const FramePoint& fp) {
            const double ph =
                testfn.is_constant() ? 1.0 : std::abs(phi.jet(fp.u, 0).value());
            if (ph == 0.0) return 0.0;
            return symcalc::sigma_matrix(fp.shape_frame, l) * std::pow(ph, p);
        });
        rep.lhs = std::pow(raw, 1.0 / p);
    }
    rep.rhs_terms = rhs_derivative_terms(k, chart, grid, testfn, opts);
    const double total = rhs_total(rep.rhs_terms);
    rep.c_star = rep.lhs / total;
    rep.pass = std::isfinite(rep.c_star) && rep.c_star <= rep.budget;
    return rep;
}

// ---- estimate-chain probes -------------------------------------------------------

ProbeRecord estimate_chain_probe(ProbeKind kind, const ProbeParams& params, const Chart& chart,
                                 const Grid& grid, const ConvexPotential& pot,
                                 const TestFunction& testfn, const EvalOptions& opts,
                                 double budget) {
    const int k = params.k, l = params.l, i0 = params.i0;
    ProbeRecord rec;
    rec.budget = budget;

    using Slot = FunctionalSpec::PhiSlot;
    auto ispec = [&](int kk, int s, Slot slot) {
        return FunctionalSpec{Family::I, kk, s, Weight::one(), slot};
    };

    std::vector<FunctionalSpec> specs;
    bool identity = false;

    switch (kind) {
        case ProbeKind::base_i0_1: {
            rec.name = "base_i0_1:k=" + std::to_string(k);
            identity = true;
            specs.push_back(ispec(k, 1, Slot::phi));
            // integrated-by-parts route: -<T_{k-1}(L) grad v, grad phi>
            specs.push_back({Family::N, k, 0, Weight::minus_one(), Slot::phi});
            break;
        }
        case ProbeKind::base_i0_2: {
            rec.name = "base_i0_2:k=" + std::to_string(k);
            identity = true;
            specs.push_back(ispec(k, 2, Slot::phi));
            specs.push_back({Family::N, k, 1, Weight::minus_one(), Slot::phi});
            break;
        }
        case ProbeKind::prop_i:
            rec.name = "prop_i:k=" + std::to_string(k) + ",l=" + std::to_string(l);
            specs.push_back({Family::I, k, l, Weight::normal_derivative(), Slot::phi});
            for (int s = 0; s <= l; ++s) specs.push_back(ispec(k, s, Slot::abs_phi));
            break;
        case ProbeKind::prop_j:
            rec.name = "prop_j:k=" + std::to_string(k) + ",l=" + std::to_string(l);
            specs.push_back({Family::J, k, l, Weight::normal_derivative(), Slot::phi});
            for (int s = 0; s <= l; ++s) specs.push_back(ispec(k, s, Slot::abs_phi));
            break;
        case ProbeKind::prop_n:
            rec.name = "prop_n:k=" + std::to_string(k) + ",l=" + std::to_string(l);
            specs.push_back({Family::N, k, l, Weight::normal_derivative(), Slot::phi});
            for (int s = 0; s <= l; ++s) specs.push_back(ispec(k - 1, s, Slot::abs_grad_phi));
            break;
        case ProbeKind::prop_k:
            if (i0 < 3) throw domain_error("prop_k: requires i0 >= 3");
            rec.name = "prop_k:k=" + std::to_string(k) + ",i0=" + std::to_string(i0);
            specs.push_back({Family::K, k, i0 - 3, Weight::minus_one(), Slot::phi});
            for (int s = 0; s <= i0 - 2; ++s) specs.push_back(ispec(k, s, Slot::abs_phi));
            for (int s = 0; s <= i0 - 3; ++s) specs.push_back(ispec(k - 1, s, Slot::abs_grad_phi));
            break;
        case ProbeKind::lemma_k0_odd:
            if (i0 < 3 || i0 % 2 == 0) throw domain_error("lemma_k0_odd: requires odd i0 >= 3");
            rec.name = "lemma_k0_odd:k=" + std::to_string(k) + ",i0=" + std::to_string(i0);
            specs.push_back(
                {Family::K, k, 0, Weight::grad_power(i0 - 3, params.sign), Slot::phi});
            specs.push_back(ispec(k, 0, Slot::abs_phi));
            specs.push_back(ispec(k, 1, Slot::abs_phi));
            specs.push_back(ispec(k - 1, 0, Slot::abs_grad_phi));
            break;
        case ProbeKind::lemma_k0_even:
            if (i0 < 4 || i0 % 2 == 1) throw domain_error("lemma_k0_even: requires even i0 >= 4");
            rec.name = "lemma_k0_even:k=" + std::to_string(k) + ",i0=" + std::to_string(i0);
            specs.push_back(
                {Family::K, k, 1, Weight::grad_power(i0 - 4, params.sign), Slot::phi});
            for (int s = 0; s <= 2; ++s) specs.push_back(ispec(k, s, Slot::abs_phi));
            for (int s = 0; s <= 1; ++s) specs.push_back(ispec(k - 1, s, Slot::abs_grad_phi));
            break;
    }

    std::vector<double> vals = eval_functionals(specs, chart, grid, pot, testfn, opts);

    if (kind == ProbeKind::base_i0_2) {
        // + <grad v, T_{k-1}(L) L grad v> phi from the divergence step.
        std::vector<Integrand> extra;
        extra.push_back([k](const NodeData& nd) {
            const SymMatrix t =
                mixed_newton(nd.rd.hess_frame, nd.fp.shape_frame, 0, k - 1);
            const Vec lg = nd.fp.shape_frame.mat().apply(nd.rd.grad_frame);
            return quadratic_form(t, lg, nd.rd.grad_frame) * nd.phi;
        });
        vals.push_back(sweep(extra, chart, grid, pot, testfn, opts)[0]);
    }

    rec.identity = identity;
    rec.lhs = vals[0];
    rec.rhs = 0.0;
    for (size_t i = 1; i < vals.size(); ++i) rec.rhs += vals[i];

    if (identity) {
        rec.residual = std::abs(rec.lhs - rec.rhs) / (1.0 + std::abs(rec.lhs));
        rec.pass = rec.residual <= 1e-6;
        rec.ratio = 0.0;
    } else {
        const double tiny = 1e-12 * (1.0 + std::abs(rec.rhs));
        if (std::abs(rec.lhs) <= tiny)
            rec.ratio = 0.0;
        else if (rec.rhs <= tiny)
            rec.ratio = std::numeric_limits<double>::infinity();
        else
            rec.ratio = rec.lhs / rec.rhs;
        rec.pass = rec.ratio <= budget;
    }
    return rec;
}

}  // namespace msk::functionals
