// Uniform tensor grids on truncated boxes, stencil calculus and quadrature.
#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace logsob {

// Point in the box; only the first `dim` entries are meaningful.
using Point = std::array<double, 2>;

// Solver gave up; carries the residual it reached.
struct solve_error : std::runtime_error {
    double residual;
    explicit solve_error(const std::string& what, double res)
        : std::runtime_error(what), residual(res) {}
};

struct nonconvergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Uniform grid on [-radius, radius]^dim, homogeneous Dirichlet convention:
// fields are extended by zero outside the box.
struct Grid {
    int dim = 1;
    double radius = 10.0;
    int points_per_axis = 401;
    int stencil_order = 4;
    double spacing = 0.05;

    std::size_t size() const {
        std::size_t n = static_cast<std::size_t>(points_per_axis);
        return dim == 1 ? n : n * n;
    }
    // x_k = -radius + k*spacing, evaluated mirror-symmetrically so that
    // coord(n-1-k) == -coord(k) exactly
    double coord(int k) const { return (k - 0.5 * (points_per_axis - 1)) * spacing; }
    // row-major: index = ix * n + iy for dim == 2
    Point point(std::size_t idx) const {
        if (dim == 1) return {coord(static_cast<int>(idx)), 0.0};
        int n = points_per_axis;
        return {coord(static_cast<int>(idx) / n), coord(static_cast<int>(idx) % n)};
    }
    bool operator==(const Grid&) const = default;
};

Grid make_grid(int dim, double radius, int points_per_axis, int stencil_order);

// Sampled real function on a Grid. Fields combine arithmetically only on
// identical grids.
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(g.size(), 0.0) {}
    Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != g.size()) throw std::invalid_argument("Field: size mismatch");
    }

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

void require_same_grid(const Field& a, const Field& b);
void require_finite(const Field& u);

template <class F>
Field sample(const Grid& g, F&& f) {
    Field out(g);
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) out.values[i] = f(g.point(i));
    return out;
}

// Central-difference Laplacian of the grid's stencil order, zero extension
// at the boundary.
Field apply_laplacian(const Field& u);

// Stencil gradient along one axis (same order, zero extension).
Field apply_gradient(const Field& u, int axis);

// Trapezoidal tensor quadrature with compensated accumulation.
double integrate(const Field& u);

// Pointwise helpers.
Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double c, const Field& a);
Field multiply(const Field& a, const Field& b);

double l2_inner(const Field& a, const Field& b);   // integrate(a*b)
double h1_inner(const Field& a, const Field& b);   // L2 + stencil-gradient pairing

// Solves (-Delta + 1) w = f with zero boundary values on the grid's stencil.
// Deterministic sparse direct solve; throws solve_error if the relative
// residual cannot be brought below 1e-12.
Field helmholtz_solve(const Field& f);

}  // namespace logsob
