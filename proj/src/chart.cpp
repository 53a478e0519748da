#include "msk/chart.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "msk/rng.hpp"

namespace msk::geometry {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<Jet> seed_vars(const Vec& u, int order) {
    const int n = static_cast<int>(u.size());
    std::vector<Jet> vars;
    vars.reserve(n);
    for (int i = 0; i < n; ++i) vars.push_back(Jet::variable(n, order, i, u[i]));
    return vars;
}

ChartJets jets_from_eval(const Chart& chart, const Vec& u, int order) {
    const int n = chart.n;
    const std::vector<Jet> coords = chart.embed(seed_vars(u, order));
    if (static_cast<int>(coords.size()) != n + 1)
        throw validation_error("chart '" + chart.id + "': embed must return n+1 coordinates");
    ChartJets j;
    j.x.resize(n + 1);
    j.d1 = Matrix(n + 1, n);
    if (order >= 2) j.d2 = Tensor3(n + 1, n, n);
    if (order >= 3) j.d3 = Tensor4(n + 1, n, n, n);
    for (int c = 0; c <= n; ++c) {
        j.x[c] = coords[c].value();
        for (int i = 0; i < n; ++i) {
            j.d1(c, i) = coords[c].d1(i);
            if (order >= 2)
                for (int k = 0; k < n; ++k) j.d2(c, i, k) = coords[c].d2(i, k);
            if (order >= 3)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) j.d3(c, i, k, l) = coords[c].d3(i, k, l);
        }
    }
    j.has_d3 = order >= 3;
    return j;
}

}  // namespace

ChartJets chart_jets(const Chart& chart, const Vec& u, int order) {
    if (static_cast<int>(u.size()) != chart.n)
        throw validation_error("chart '" + chart.id + "': wrong coordinate count");
    if (order <= 2 || chart.analytic_third) return jets_from_eval(chart, u, order);

    // d3 fallback: central differences of the analytic d2.
    ChartJets j = jets_from_eval(chart, u, 2);
    const int n = chart.n;
    const double h = chart.fd_step;
    j.d3 = Tensor4(n + 1, n, n, n);
    for (int l = 0; l < n; ++l) {
        Vec up = u, dn = u;
        up[l] += h;
        dn[l] -= h;
        const ChartJets jp = jets_from_eval(chart, up, 2);
        const ChartJets jm = jets_from_eval(chart, dn, 2);
        for (int c = 0; c <= n; ++c)
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    j.d3(c, i, k, l) = (jp.d2(c, i, k) - jm.d2(c, i, k)) / (2.0 * h);
    }
    j.has_d3 = true;
    return j;
}

Vec Grid::node(std::size_t flat) const {
    Vec u(dim());
    for (int ax = dim() - 1; ax >= 0; --ax) {
        const std::size_t c = axis_nodes[ax].size();
        u[ax] = axis_nodes[ax][flat % c];
        flat /= c;
    }
    return u;
}

double Grid::weight(std::size_t flat) const {
    double w = 1.0;
    for (int ax = dim() - 1; ax >= 0; --ax) {
        const std::size_t c = axis_nodes[ax].size();
        w *= axis_weights[ax][flat % c];
        flat /= c;
    }
    return w;
}

double Grid::total_weight() const {
    double w = 1.0;
    for (const auto& aw : axis_weights) {
        double s = 0.0;
        for (double x : aw) s += x;
        w *= s;
    }
    return w;
}

std::string Grid::counts_string() const {
    std::string s;
    for (int i = 0; i < dim(); ++i) {
        if (i) s += "x";
        s += std::to_string(axis_nodes[i].size());
    }
    return s;
}

void gauss_legendre(int n, Vec& nodes, Vec& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev initial guess, Newton on P_n.
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) p0 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double pn = (n == 1) ? x : p1;
            const double pm = (n == 1) ? 1.0 : p0;
            pp = n * (x * pn - pm) / (x * x - 1.0);
            const double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

Grid make_grid(const Chart& chart, const std::vector<int>& counts) {
    if (static_cast<int>(counts.size()) != chart.n)
        throw validation_error("grid: need one node count per chart axis");
    Grid g;
    for (int ax = 0; ax < chart.n; ++ax) {
        const int c = counts[ax];
        if (c < 1) throw validation_error("grid: node counts must be positive");
        const double a = chart.domain.lo[ax], b = chart.domain.hi[ax];
        Vec nodes, w;
        const bool polar = chart.topology == Topology::closed_sphere && ax < chart.n - 1;
        if (polar) {
            gauss_legendre(c, nodes, w);
            for (int i = 0; i < c; ++i) {
                nodes[i] = 0.5 * (a + b) + 0.5 * (b - a) * nodes[i];
                w[i] *= 0.5 * (b - a);
            }
        } else {
            nodes.resize(c);
            w.assign(c, (b - a) / c);
            for (int i = 0; i < c; ++i) nodes[i] = a + (i + 0.5) * (b - a) / c;
        }
        g.axis_nodes.push_back(std::move(nodes));
        g.axis_weights.push_back(std::move(w));
    }
    return g;
}

std::vector<int> default_grid_counts(const Chart& chart) {
    const int n = chart.n;
    if (chart.topology == Topology::closed_sphere) {
        int np = 8;
        if (n == 1) return {400};
        if (n == 2) np = 200;
        if (n == 3) np = 32;
        if (n == 4) np = 14;
        if (n == 5) np = 9;
        std::vector<int> c(n, np);
        c[n - 1] = 2 * np;
        return c;
    }
    int per = 10;
    if (n == 1) per = 400;
    if (n == 2) per = 96;
    if (n == 3) per = 28;
    if (n == 4) per = 12;
    return std::vector<int>(n, per);
}

namespace {

// Shared angular embedding: radial(u) * (unit sphere product form) with
// per-coordinate stretch factors.
std::vector<Jet> angular_embed(std::span<const Jet> u, const Vec& stretch, const Jet* radial) {
    const int n = static_cast<int>(u.size());
    std::vector<Jet> coords;
    coords.reserve(n + 1);
    Jet prod = Jet::constant(u[0].nvars(), u[0].order(), 1.0);
    for (int c = 0; c <= n; ++c) {
        Jet x = (c < n) ? prod * cos(u[c]) : prod;
        if (radial) x = x * (*radial);
        coords.push_back(x * stretch[c]);
        if (c < n) prod = prod * sin(u[c]);
    }
    return coords;
}

Box angular_box_full(int n) {
    Box b;
    b.lo.assign(n, 0.0);
    b.hi.assign(n, kPi);
    b.hi[n - 1] = 2.0 * kPi;
    return b;
}

Box angular_box_patch(int n) {
    Box b;
    b.lo.assign(n, 0.30 * kPi);
    b.hi.assign(n, 0.70 * kPi);
    b.lo[n - 1] = 0.20 * kPi;
    b.hi[n - 1] = 0.80 * kPi;
    return b;
}

void finish(Chart& c) {
    c.fd_step = 1e-4 * c.domain.max_extent();
}

}  // namespace

Chart make_sphere(int n, double r) {
    if (n < 1 || n > 6) throw domain_error("sphere: supported for 1 <= n <= 6");
    if (!(r > 0.0)) throw domain_error("sphere: radius must be positive");
    Chart c;
    std::ostringstream id;
    id << "sphere:r=" << r << ":n=" << n;
    c.id = id.str();
    c.n = n;
    c.domain = angular_box_full(n);
    c.topology = Topology::closed_sphere;
    c.orient = Orientation::toward_reference;
    c.reference_point.assign(n + 1, 0.0);
    c.radius = r;
    const Vec stretch(n + 1, r);
    c.embed = [stretch](std::span<const Jet> u) { return angular_embed(u, stretch, nullptr); };
    finish(c);
    return c;
}

Chart make_ellipsoid(const Vec& semiaxes) {
    const int n = static_cast<int>(semiaxes.size()) - 1;
    if (n < 1 || n > 6) throw domain_error("ellipsoid: need 2..7 semi-axes");
    for (double a : semiaxes)
        if (!(a > 0.0)) throw domain_error("ellipsoid: semi-axes must be positive");
    Chart c;
    std::ostringstream id;
    id << "ellipsoid:";
    for (size_t i = 0; i < semiaxes.size(); ++i) id << (i ? "," : "") << semiaxes[i];
    c.id = id.str();
    c.n = n;
    c.domain = angular_box_patch(n);
    c.topology = Topology::patch;
    c.orient = Orientation::toward_reference;
    c.reference_point.assign(n + 1, 0.0);
    const Vec stretch = semiaxes;
    c.embed = [stretch](std::span<const Jet> u) { return angular_embed(u, stretch, nullptr); };
    finish(c);
    return c;
}

Chart make_paraboloid(int n, double halfwidth) {
    if (n < 1 || n > 6) throw domain_error("paraboloid: supported for 1 <= n <= 6");
    Chart c;
    c.id = (n == 2) ? "paraboloid-patch" : "paraboloid-patch:n=" + std::to_string(n);
    c.n = n;
    c.domain.lo.assign(n, -halfwidth);
    c.domain.hi.assign(n, halfwidth);
    c.topology = Topology::patch;
    c.orient = Orientation::ambient_last_positive;
    c.embed = [n](std::span<const Jet> u) {
        std::vector<Jet> coords(u.begin(), u.end());
        Jet s = Jet::constant(u[0].nvars(), u[0].order(), 0.0);
        for (int i = 0; i < n; ++i) s += u[i] * u[i];
        coords.push_back(s * 0.5);
        return coords;
    };
    finish(c);
    return c;
}

Chart make_saddle(double halfwidth) {
    Chart c;
    c.id = "saddle-patch";
    c.n = 2;
    c.domain.lo = {-halfwidth, -halfwidth};
    c.domain.hi = {halfwidth, halfwidth};
    c.topology = Topology::patch;
    c.orient = Orientation::ambient_last_positive;
    c.embed = [](std::span<const Jet> u) {
        std::vector<Jet> coords(u.begin(), u.end());
        coords.push_back(u[0] * u[0] - u[1] * u[1]);
        return coords;
    };
    finish(c);
    return c;
}

Chart make_perturbed_sphere(int n, double eps) {
    if (n < 1 || n > 6) throw domain_error("perturbed-sphere: supported for 1 <= n <= 6");
    Chart c;
    std::ostringstream id;
    id << "perturbed-sphere:eps=" << eps;
    c.id = id.str();
    c.n = n;
    c.domain = angular_box_patch(n);
    c.topology = Topology::patch;
    c.orient = Orientation::toward_reference;
    c.reference_point.assign(n + 1, 0.0);
    const Vec stretch(n + 1, 1.0);
    c.embed = [stretch, eps, n](std::span<const Jet> u) {
        Jet rho = Jet::constant(u[0].nvars(), u[0].order(), 1.0);
        for (int a = 0; a < n; ++a) rho = rho * cos(u[a] * 2.0 - 0.4);
        rho = 1.0 + eps * rho;
        return angular_embed(u, stretch, &rho);
    };
    finish(c);
    return c;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

double parse_kv(const std::string& part, const std::string& key) {
    const std::string pfx = key + "=";
    if (part.rfind(pfx, 0) != 0)
        throw validation_error("surface id: expected '" + key + "=...', got '" + part + "'");
    return std::stod(part.substr(pfx.size()));
}

}  // namespace

Chart chart_from_id(const std::string& id) {
    const std::vector<std::string> parts = split(id, ':');
    const std::string& kind = parts[0];
    if (kind == "sphere") {
        double r = 1.0;
        int n = 2;
        for (size_t i = 1; i < parts.size(); ++i) {
            if (parts[i].rfind("r=", 0) == 0)
                r = parse_kv(parts[i], "r");
            else if (parts[i].rfind("n=", 0) == 0)
                n = static_cast<int>(parse_kv(parts[i], "n"));
            else
                throw validation_error("surface id: unknown sphere field '" + parts[i] + "'");
        }
        return make_sphere(n, r);
    }
    if (kind == "ellipsoid") {
        Vec axes = {1.0, 1.3, 0.8};
        if (parts.size() > 1) {
            axes.clear();
            for (const std::string& a : split(parts[1], ',')) axes.push_back(std::stod(a));
        }
        return make_ellipsoid(axes);
    }
    if (kind == "paraboloid-patch") {
        int n = 2;
        if (parts.size() > 1) n = static_cast<int>(parse_kv(parts[1], "n"));
        return make_paraboloid(n, 0.7);
    }
    if (kind == "saddle-patch") return make_saddle(0.6);
    if (kind == "perturbed-sphere") {
        double eps = 0.05;
        if (parts.size() > 1) eps = parse_kv(parts[1], "eps");
        return make_perturbed_sphere(2, eps);
    }
    throw validation_error("surface id: unknown surface '" + id + "'");
}

std::vector<std::string> catalog_surface_ids() {
    return {
        "sphere:r=1:n=2",     "sphere:r=2:n=3",      "ellipsoid:1,1.3,0.8",
        "paraboloid-patch",   "perturbed-sphere:eps=0.05", "saddle-patch",
    };
}

Chart with_fd_third(const Chart& chart, double step) {
    Chart c = chart;
    c.analytic_third = false;
    c.fd_step = step;
    return c;
}

Chart dilated(const Chart& chart, double c) {
    Chart out = chart;
    out.id = chart.id + ":dilated=" + std::to_string(c);
    const auto base = chart.embed;
    out.embed = [base, c](std::span<const Jet> u) {
        std::vector<Jet> coords = base(u);
        for (Jet& x : coords) x *= c;
        return coords;
    };
    out.radius = chart.radius * c;
    for (double& x : out.reference_point) x *= c;
    return out;
}

double closed_sphere_area(int n, double r) {
    // |S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2)
    const double a = 0.5 * (n + 1);
    return 2.0 * std::pow(kPi, a) / std::tgamma(a) * std::pow(r, n);
}

void validate_chart(const Chart& chart, std::uint64_t seed, int npoints) {
    Rng rng(seed);
    const int n = chart.n;
    for (int p = 0; p < npoints; ++p) {
        Vec u(n);
        for (int i = 0; i < n; ++i)
            u[i] = chart.domain.lo[i] +
                   (0.1 + 0.8 * rng.uniform01()) * (chart.domain.hi[i] - chart.domain.lo[i]);
        const ChartJets j = chart_jets(chart, u, 2);

        // Immersion: Gram determinant of d1 must be positive.
        Matrix g(n, n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                double s = 0.0;
                for (int c = 0; c <= n; ++c) s += j.d1(c, i) * j.d1(c, k);
                g(i, k) = s;
            }
        if (determinant(g) <= 1e-12)
            throw immersion_error("chart '" + chart.id + "': rank-deficient d1");

        // d1 against central differences of the embedding.
        const double h = 1e-5 * chart.domain.max_extent();
        for (int i = 0; i < n; ++i) {
            Vec up = u, dn = u;
            up[i] += h;
            dn[i] -= h;
            const ChartJets jp = jets_from_eval(chart, up, 1);
            const ChartJets jm = jets_from_eval(chart, dn, 1);
            for (int c = 0; c <= n; ++c) {
                const double fd = (jp.x[c] - jm.x[c]) / (2.0 * h);
                if (std::abs(fd - j.d1(c, i)) > 1e-6 * (1.0 + std::abs(j.d1(c, i))))
                    throw validation_error("chart '" + chart.id + "': d1 disagrees with FD");
            }
        }
    }
}

}  // namespace msk::geometry
