#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "msk/jets.hpp"
#include "msk/linalg.hpp"

namespace msk::geometry {

struct Box {
    Vec lo, hi;
    int dim() const { return static_cast<int>(lo.size()); }
    double volume() const {
        double v = 1.0;
        for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
        return v;
    }
    double max_extent() const {
        double m = 0.0;
        for (int i = 0; i < dim(); ++i) m = std::max(m, hi[i] - lo[i]);
        return m;
    }
};

enum class Topology { patch, closed_sphere };
enum class Orientation { toward_reference, ambient_last_positive };

// Analytic parametrization u -> X(u) in R^{n+1}, written as a jet formula so
// derivatives through third order come out exactly. The closed_sphere topology
// is the product angular chart of a round sphere (polar angles first, azimuth
// last); everything else is an open patch.
struct Chart {
    std::string id;
    int n = 0;
    Box domain;
    Topology topology = Topology::patch;
    Orientation orient = Orientation::toward_reference;
    Vec reference_point;       // ambient point the inner normal looks toward
    bool analytic_third = true;
    double fd_step = 1e-4;     // absolute step of the d3 finite-difference fallback
    double radius = 0.0;       // closed spheres only
    std::function<std::vector<Jet>(std::span<const Jet>)> embed;
};

// Embedding jets at u: position, d1 (ambient x chart), d2, and (order 3) d3.
// When the chart lacks analytic third derivatives, d3 falls back to central
// differences of d2 with step chart.fd_step (residuals then degrade to O(h^2)).
struct ChartJets {
    Vec x;       // n+1
    Matrix d1;   // (n+1) x n
    Tensor3 d2;  // (n+1) x n x n
    Tensor4 d3;  // (n+1) x n x n x n
    bool has_d3 = false;
};

ChartJets chart_jets(const Chart& chart, const Vec& u, int order);

// Tensor-product quadrature grid. Patch axes use the midpoint rule; the polar
// axes of closed spheres use Gauss-Legendre nodes (interior nodes, positive
// weights summing to the axis length) because midpoint stalls at O(N^-2)
// against the sin-power area factor. Weights are cell measures in chart
// coordinates; the area factor sqrt(det g) is applied by the integrator.
struct Grid {
    std::vector<Vec> axis_nodes;
    std::vector<Vec> axis_weights;

    int dim() const { return static_cast<int>(axis_nodes.size()); }
    std::size_t size() const {
        std::size_t s = 1;
        for (const auto& a : axis_nodes) s *= a.size();
        return s;
    }
    std::vector<int> counts() const {
        std::vector<int> c;
        for (const auto& a : axis_nodes) c.push_back(static_cast<int>(a.size()));
        return c;
    }
    Vec node(std::size_t flat) const;
    double weight(std::size_t flat) const;
    double total_weight() const;  // equals the domain box volume
    std::string counts_string() const;  // "AxB"
};

Grid make_grid(const Chart& chart, const std::vector<int>& counts);
std::vector<int> default_grid_counts(const Chart& chart);

// Gauss-Legendre nodes/weights on [-1, 1] (Newton on the Legendre recurrence).
void gauss_legendre(int n, Vec& nodes, Vec& weights);

// ---- surface catalog -------------------------------------------------------

Chart make_sphere(int n, double r);
Chart make_ellipsoid(const Vec& semiaxes);          // open angular patch
Chart make_paraboloid(int n, double halfwidth);     // graph of |u|^2/2
Chart make_saddle(double halfwidth);                // graph of u1^2 - u2^2
Chart make_perturbed_sphere(int n, double eps);     // radially modulated patch

// Parses ids like "sphere:r=2:n=3", "ellipsoid:1,1.3,0.8", "paraboloid-patch",
// "paraboloid-patch:n=3", "perturbed-sphere:eps=0.05", "saddle-patch".
Chart chart_from_id(const std::string& id);
std::vector<std::string> catalog_surface_ids();

// Copy with the analytic third derivatives disabled (forces the FD fallback).
Chart with_fd_third(const Chart& chart, double step);

// Dilates the embedding by factor c (scaling-law checks).
Chart dilated(const Chart& chart, double c);

// |S^n| r^n.
double closed_sphere_area(int n, double r);

// Immersion rank and d1-vs-central-difference check at seeded interior points;
// throws on failure.
void validate_chart(const Chart& chart, std::uint64_t seed, int npoints = 10);

}  // namespace msk::geometry
