#include "logsob/grid.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace logsob {

Grid make_grid(int dim, double radius, int points_per_axis, int stencil_order) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("make_grid: dim must be 1 or 2");
    if (!(radius >= 4.0)) throw std::invalid_argument("make_grid: radius must be >= 4");
    if (points_per_axis < 16) throw std::invalid_argument("make_grid: points_per_axis must be >= 16");
    if (stencil_order != 2 && stencil_order != 4)
        throw std::invalid_argument("make_grid: stencil_order must be 2 or 4");
    Grid g;
    g.dim = dim;
    g.radius = radius;
    g.points_per_axis = points_per_axis;
    g.stencil_order = stencil_order;
    g.spacing = 2.0 * radius / (points_per_axis - 1);
    return g;
}

void require_same_grid(const Field& a, const Field& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("fields live on different grids");
}

void require_finite(const Field& u) {
    for (double v : u.values)
        if (!std::isfinite(v)) throw std::invalid_argument("field contains non-finite values");
}

namespace {

// 1D Laplacian stencil weights divided by h^2. Zero extension outside.
struct LapStencil {
    int reach;
    double w0, w1, w2;  // center, +-1, +-2
};

LapStencil lap_stencil(int order, double h) {
    const double h2 = h * h;
    if (order == 2) return {1, -2.0 / h2, 1.0 / h2, 0.0};
    return {2, -30.0 / (12.0 * h2), 16.0 / (12.0 * h2), -1.0 / (12.0 * h2)};
}

struct GradStencil {
    int reach;
    double w1, w2;  // antisymmetric: +k gets +wk, -k gets -wk
};

GradStencil grad_stencil(int order, double h) {
    if (order == 2) return {1, 1.0 / (2.0 * h), 0.0};
    return {2, 8.0 / (12.0 * h), -1.0 / (12.0 * h)};
}

}  // namespace

Field apply_laplacian(const Field& u) {
    require_finite(u);
    const Grid& g = u.grid;
    const int n = g.points_per_axis;
    const LapStencil s = lap_stencil(g.stencil_order, g.spacing);
    Field out(g);
    auto at1 = [&](const std::vector<double>& v, int i) -> double {
        return (i < 0 || i >= n) ? 0.0 : v[static_cast<std::size_t>(i)];
    };
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            double acc = s.w0 * u.values[i] + s.w1 * (at1(u.values, i - 1) + at1(u.values, i + 1));
            if (s.reach == 2) acc += s.w2 * (at1(u.values, i - 2) + at1(u.values, i + 2));
            out.values[i] = acc;
        }
        return out;
    }
    auto at2 = [&](int ix, int iy) -> double {
        return (ix < 0 || ix >= n || iy < 0 || iy >= n)
                   ? 0.0
                   : u.values[static_cast<std::size_t>(ix) * n + iy];
    };
    for (int ix = 0; ix < n; ++ix) {
        for (int iy = 0; iy < n; ++iy) {
            double acc = 2.0 * s.w0 * at2(ix, iy);
            acc += s.w1 * (at2(ix - 1, iy) + at2(ix + 1, iy) + at2(ix, iy - 1) + at2(ix, iy + 1));
            if (s.reach == 2)
                acc += s.w2 * (at2(ix - 2, iy) + at2(ix + 2, iy) + at2(ix, iy - 2) + at2(ix, iy + 2));
            out.values[static_cast<std::size_t>(ix) * n + iy] = acc;
        }
    }
    return out;
}

Field apply_gradient(const Field& u, int axis) {
    const Grid& g = u.grid;
    if (axis < 0 || axis >= g.dim) throw std::invalid_argument("apply_gradient: bad axis");
    const int n = g.points_per_axis;
    const GradStencil s = grad_stencil(g.stencil_order, g.spacing);
    Field out(g);
    if (g.dim == 1) {
        auto at = [&](int i) -> double { return (i < 0 || i >= n) ? 0.0 : u.values[i]; };
        for (int i = 0; i < n; ++i) {
            double acc = s.w1 * (at(i + 1) - at(i - 1));
            if (s.reach == 2) acc += s.w2 * (at(i + 2) - at(i - 2));
            out.values[i] = acc;
        }
        return out;
    }
    auto at2 = [&](int ix, int iy) -> double {
        return (ix < 0 || ix >= n || iy < 0 || iy >= n)
                   ? 0.0
                   : u.values[static_cast<std::size_t>(ix) * n + iy];
    };
    for (int ix = 0; ix < n; ++ix) {
        for (int iy = 0; iy < n; ++iy) {
            double acc;
            if (axis == 0) {
                acc = s.w1 * (at2(ix + 1, iy) - at2(ix - 1, iy));
                if (s.reach == 2) acc += s.w2 * (at2(ix + 2, iy) - at2(ix - 2, iy));
            } else {
                acc = s.w1 * (at2(ix, iy + 1) - at2(ix, iy - 1));
                if (s.reach == 2) acc += s.w2 * (at2(ix, iy + 2) - at2(ix, iy - 2));
            }
            out.values[static_cast<std::size_t>(ix) * n + iy] = acc;
        }
    }
    return out;
}

namespace {

// Trapezoid weight of a flat index (product of per-axis end weights).
inline double trap_weight(const Grid& g, std::size_t idx) {
    const int n = g.points_per_axis;
    if (g.dim == 1) {
        int i = static_cast<int>(idx);
        return (i == 0 || i == n - 1) ? 0.5 : 1.0;
    }
    int ix = static_cast<int>(idx) / n, iy = static_cast<int>(idx) % n;
    double w = 1.0;
    if (ix == 0 || ix == n - 1) w *= 0.5;
    if (iy == 0 || iy == n - 1) w *= 0.5;
    return w;
}

}  // namespace

double integrate(const Field& u) {
    require_finite(u);
    const Grid& g = u.grid;
    // Kahan compensated accumulation for run-to-run determinism.
    double sum = 0.0, c = 0.0;
    const std::size_t m = u.size();
    for (std::size_t i = 0; i < m; ++i) {
        double term = trap_weight(g, i) * u.values[i] - c;
        double t = sum + term;
        c = (t - sum) - term;
        sum = t;
    }
    double cell = g.spacing;
    if (g.dim == 2) cell *= g.spacing;
    return sum * cell;
}

Field operator+(const Field& a, const Field& b) {
    require_same_grid(a, b);
    Field out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a.values[i] + b.values[i];
    return out;
}

Field operator-(const Field& a, const Field& b) {
    require_same_grid(a, b);
    Field out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a.values[i] - b.values[i];
    return out;
}

Field operator*(double c, const Field& a) {
    Field out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = c * a.values[i];
    return out;
}

Field multiply(const Field& a, const Field& b) {
    require_same_grid(a, b);
    Field out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a.values[i] * b.values[i];
    return out;
}

double l2_inner(const Field& a, const Field& b) { return integrate(multiply(a, b)); }

double h1_inner(const Field& a, const Field& b) {
    require_same_grid(a, b);
    double acc = l2_inner(a, b);
    for (int l = 0; l < a.grid.dim; ++l)
        acc += l2_inner(apply_gradient(a, l), apply_gradient(b, l));
    return acc;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Assembles -Delta + diag(potential); potential may be empty (then zero).
SpMat assemble_neg_laplacian_plus(const Grid& g, const std::vector<double>& potential) {
    const int n = g.points_per_axis;
    const std::size_t N = g.size();
    const LapStencil s = lap_stencil(g.stencil_order, g.spacing);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(N * (g.dim == 1 ? 5 : 9));
    auto add = [&](std::size_t r, std::size_t c, double v) {
        trip.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    };
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            double diag = -s.w0 + (potential.empty() ? 0.0 : potential[i]);
            add(i, i, diag);
            if (i - 1 >= 0) add(i, i - 1, -s.w1);
            if (i + 1 < n) add(i, i + 1, -s.w1);
            if (s.reach == 2) {
                if (i - 2 >= 0) add(i, i - 2, -s.w2);
                if (i + 2 < n) add(i, i + 2, -s.w2);
            }
        }
    } else {
        auto id = [&](int ix, int iy) { return static_cast<std::size_t>(ix) * n + iy; };
        for (int ix = 0; ix < n; ++ix) {
            for (int iy = 0; iy < n; ++iy) {
                std::size_t r = id(ix, iy);
                double diag = -2.0 * s.w0 + (potential.empty() ? 0.0 : potential[r]);
                add(r, r, diag);
                auto off = [&](int jx, int jy, double w) {
                    if (jx >= 0 && jx < n && jy >= 0 && jy < n) add(r, id(jx, jy), -w);
                };
                off(ix - 1, iy, s.w1);
                off(ix + 1, iy, s.w1);
                off(ix, iy - 1, s.w1);
                off(ix, iy + 1, s.w1);
                if (s.reach == 2) {
                    off(ix - 2, iy, s.w2);
                    off(ix + 2, iy, s.w2);
                    off(ix, iy - 2, s.w2);
                    off(ix, iy + 2, s.w2);
                }
            }
        }
    }
    SpMat A(static_cast<int>(N), static_cast<int>(N));
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

struct HelmholtzFactor {
    SpMat A;
    Eigen::SimplicialLDLT<SpMat> ldlt;
};

// Factorization cache keyed by grid parameters; operations stay pure.
std::shared_ptr<HelmholtzFactor> helmholtz_factor(const Grid& g) {
    using Key = std::tuple<int, double, int, int>;
    static std::map<Key, std::shared_ptr<HelmholtzFactor>> cache;
    static std::mutex mtx;
    Key key{g.dim, g.radius, g.points_per_axis, g.stencil_order};
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto fac = std::make_shared<HelmholtzFactor>();
    std::vector<double> ones(g.size(), 1.0);
    fac->A = assemble_neg_laplacian_plus(g, ones);
    fac->ldlt.compute(fac->A);
    if (fac->ldlt.info() != Eigen::Success)
        throw solve_error("helmholtz_solve: factorization failed", std::nan(""));
    cache[key] = fac;
    return fac;
}

}  // namespace

namespace detail {
// Shared with the linearized/bubble modules.
Eigen::SparseMatrix<double> assemble_operator(const Grid& g, const std::vector<double>& potential) {
    return assemble_neg_laplacian_plus(g, potential);
}
}  // namespace detail

Field helmholtz_solve(const Field& f) {
    require_finite(f);
    auto fac = helmholtz_factor(f.grid);
    Eigen::Map<const Eigen::VectorXd> b(f.values.data(), static_cast<Eigen::Index>(f.size()));
    Eigen::VectorXd x = fac->ldlt.solve(b);
    double nb = b.norm();
    double res = (fac->A * x - b).norm();
    if (nb > 0.0 && res / nb > 1e-12) {
        // one step of iterative refinement
        Eigen::VectorXd r = b - fac->A * x;
        x += fac->ldlt.solve(r);
        res = (fac->A * x - b).norm();
        if (res / nb > 1e-12)
            throw solve_error("helmholtz_solve: residual above tolerance", res / nb);
    }
    Field out(f.grid);
    Eigen::Map<Eigen::VectorXd>(out.values.data(), x.size()) = x;
    return out;
}

}  // namespace logsob
