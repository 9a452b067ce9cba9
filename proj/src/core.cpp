#include "logsob/core.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "logsob/norms.hpp"

namespace logsob {

namespace {

inline double xlogx(double t) { return t > 0.0 ? t * std::log(t) : 0.0; }
inline double x2logx(double t) {
    double a = std::abs(t);
    return a > 0.0 ? t * t * std::log(a) : 0.0;
}

double dist_sq(const Point& x, const Point& y, int dim) {
    double s = 0.0;
    for (int l = 0; l < dim; ++l) s += (x[l] - y[l]) * (x[l] - y[l]);
    return s;
}

void check_center(const Grid& g, const Point& z) {
    for (int l = 0; l < g.dim; ++l)
        if (std::abs(z[l]) > g.radius - 2.0)
            throw std::invalid_argument("center violates the margin-2 interior requirement");
}

}  // namespace

Field gaussian_extremal(const GaussianParams& params, const Grid& grid) {
    const double a = params.inverse_variance;
    if (!(a > 0.0)) throw std::invalid_argument("gaussian_extremal: inverse_variance must be > 0");
    check_center(grid, params.center);
    double amp;
    if (params.gauge == Gauge::solution) {
        if (std::abs(a - 1.0) > 1e-14)
            throw std::invalid_argument("gaussian_extremal: solution gauge requires a = 1");
        amp = std::exp(0.5 * (1.0 + grid.dim));
    } else {
        amp = std::pow(a / M_PI, grid.dim / 4.0);
    }
    // Dirichlet truncation must be negligible for this width/center.
    double margin = grid.radius;
    for (int l = 0; l < grid.dim; ++l)
        margin = std::min(margin, grid.radius - std::abs(params.center[l]));
    if (amp * std::exp(-0.5 * a * margin * margin) >= 1e-14)
        throw std::invalid_argument("gaussian_extremal: boundary value above 1e-14; enlarge radius");
    return sample(grid, [&](const Point& x) {
        return amp * std::exp(-0.5 * a * dist_sq(x, params.center, grid.dim));
    });
}

Field dgaussian(const Grid& grid, const Point& center, int axis) {
    if (axis < 0 || axis >= grid.dim) throw std::invalid_argument("dgaussian: bad axis");
    const double amp = std::exp(0.5 * (1.0 + grid.dim));
    return sample(grid, [&](const Point& x) {
        return -(x[axis] - center[axis]) * amp *
               std::exp(-0.5 * dist_sq(x, center, grid.dim));
    });
}

Field bubble_sum(const Grid& grid, const std::vector<Point>& centers) {
    if (centers.empty()) throw std::invalid_argument("bubble_sum: need >= 1 center");
    const double amp = std::exp(0.5 * (1.0 + grid.dim));
    return sample(grid, [&](const Point& x) {
        double s = 0.0;
        for (const Point& y : centers) s += amp * std::exp(-0.5 * dist_sq(x, y, grid.dim));
        return s;
    });
}

Field log_bubble_sum(const Grid& grid, const std::vector<Point>& centers) {
    if (centers.empty()) throw std::invalid_argument("log_bubble_sum: need >= 1 center");
    const double half_amp = 0.5 * (1.0 + grid.dim);
    return sample(grid, [&](const Point& x) {
        std::size_t bi = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < centers.size(); ++i) {
            double e = half_amp - 0.5 * dist_sq(x, centers[i], grid.dim);
            if (e > best) {
                best = e;
                bi = i;
            }
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < centers.size(); ++i) {
            if (i == bi) continue;
            acc += std::exp(half_amp - 0.5 * dist_sq(x, centers[i], grid.dim) - best);
        }
        return best + std::log1p(acc);
    });
}

DeficitReport deficit(const Field& u, bool normalize) {
    require_finite(u);
    NormReport nr = norms(u);
    if (nr.l2 == 0.0) throw std::invalid_argument("deficit: zero field");
    Field v = u;
    if (normalize) {
        v = (1.0 / nr.l2) * u;
    } else if (std::abs(nr.l2 - 1.0) > 1e-8) {
        throw std::invalid_argument("deficit: field is not unit L2 (pass normalize)");
    }
    DeficitReport r;
    Field ent(v.grid);
    for (std::size_t i = 0; i < v.size(); ++i) ent.values[i] = x2logx(v.values[i]);
    r.entropy = integrate(ent);
    double gradsq = 0.0;
    for (int l = 0; l < v.grid.dim; ++l) {
        Field d = apply_gradient(v, l);
        gradsq += l2_inner(d, d);
    }
    r.grad_l2_sq = gradsq;
    r.l2 = normalize ? 1.0 : nr.l2;
    const double d = v.grid.dim;
    r.deficit = 0.25 * d * std::log(2.0 / (M_PI * d * M_E) * gradsq) - r.entropy;
    return r;
}

Field residual(const Field& u) {
    require_finite(u);
    Field lap = apply_laplacian(u);
    Field out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) {
        double v = u.values[i];
        double nl = (v != 0.0) ? 2.0 * v * std::log(std::abs(v)) : 0.0;
        out.values[i] = -lap.values[i] + v - nl;
    }
    return out;
}

Field error_term(const std::vector<Point>& centers, const Grid& grid) {
    if (centers.empty()) throw std::invalid_argument("error_term: need >= 1 center");
    const std::size_t nu = centers.size();
    const double half_amp = 0.5 * (1.0 + grid.dim);
    return sample(grid, [&](const Point& x) {
        if (nu == 1) return 0.0;
        double acc = 0.0;
        for (std::size_t i = 0; i < nu; ++i) {
            double li = half_amp - 0.5 * dist_sq(x, centers[i], grid.dim);
            double ratio = 0.0;  // sum_{j != i} g_j / g_i
            for (std::size_t j = 0; j < nu; ++j) {
                if (j == i) continue;
                double lj = half_amp - 0.5 * dist_sq(x, centers[j], grid.dim);
                ratio += std::exp(lj - li);
            }
            acc += 2.0 * std::exp(li) * std::log1p(ratio);
        }
        return acc;
    });
}

Field nonlinear_term(const std::vector<Point>& centers, const Field& rho) {
    require_finite(rho);
    Field G = bubble_sum(rho.grid, centers);
    Field out(rho.grid);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double g = G.values[i];
        double r = rho.values[i];
        double s = g + r;
        if (s < -1e-12)
            throw std::invalid_argument("nonlinear_term: G + rho dropped below -1e-12");
        if (s <= 0.0) {
            // clamped to zero: N = -2 g log g - 2 (1 + log g) rho with rho = -g
            out.values[i] = (g > 0.0) ? 2.0 * g : 0.0;
        } else if (g > 0.0) {
            out.values[i] = 2.0 * s * std::log1p(r / g) - 2.0 * r;
        } else {
            out.values[i] = 2.0 * xlogx(s);
        }
    }
    return out;
}

namespace {

// 4-point Lagrange interpolation on the uniform axis; clamped stencil at the
// edges, zero outside the box.
double interp_axis_weights(double s, double w[4], int& base, int n) {
    // s is the fractional index; returns 0/1 validity
    int i1 = static_cast<int>(std::floor(s));
    base = i1 - 1;
    if (base < 0) base = 0;
    if (base > n - 4) base = n - 4;
    double t = s - base;
    // Lagrange basis at nodes 0,1,2,3 evaluated at t
    w[0] = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    w[1] = t * (t - 2.0) * (t - 3.0) / 2.0;
    w[2] = -t * (t - 1.0) * (t - 3.0) / 2.0;
    w[3] = t * (t - 1.0) * (t - 2.0) / 6.0;
    return 1.0;
}

double interp_value(const Field& u, const Point& y) {
    const Grid& g = u.grid;
    const int n = g.points_per_axis;
    for (int l = 0; l < g.dim; ++l)
        if (std::abs(y[l]) > g.radius) return 0.0;
    double wx[4];
    int bx;
    interp_axis_weights((y[0] + g.radius) / g.spacing, wx, bx, n);
    if (g.dim == 1) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += wx[k] * u.values[bx + k];
        return acc;
    }
    double wy[4];
    int by;
    interp_axis_weights((y[1] + g.radius) / g.spacing, wy, by, n);
    double acc = 0.0;
    for (int kx = 0; kx < 4; ++kx)
        for (int ky = 0; ky < 4; ++ky)
            acc += wx[kx] * wy[ky] * u.values[static_cast<std::size_t>(bx + kx) * n + (by + ky)];
    return acc;
}

}  // namespace

std::pair<ScalingGauge, Field> gauge_chain(const Field& u) {
    require_finite(u);
    NormReport nr = norms(u);
    if (std::abs(nr.l2 - 1.0) > 1e-8)
        throw std::invalid_argument("gauge_chain: input must have unit L2 norm");
    double gradsq = nr.grad_l2 * nr.grad_l2;
    if (!(gradsq > 0.0)) throw std::invalid_argument("gauge_chain: zero gradient");
    const double d = u.grid.dim;

    ScalingGauge sg;
    sg.lambda = std::sqrt(d / (2.0 * gradsq));
    Field ent(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) ent.values[i] = x2logx(u.values[i]);
    double entropy = integrate(ent);
    // integrated Euler-Lagrange identity: d/2 - 1 - 2 sigma_u = 2 * entropy
    sg.sigma_u = 0.5 * (0.5 * d - 1.0 - 2.0 * entropy);
    // the amplitude that moves (1.8) onto -Delta u + u = 2 u log u
    sg.alpha_u = std::exp(1.0 + sg.sigma_u - 0.5 * d * std::log(sg.lambda));

    const double scale = sg.alpha_u * std::pow(sg.lambda, 0.5 * d);
    Field out(u.grid);
    const std::size_t N = u.size();
    for (std::size_t p = 0; p < N; ++p) {
        Point x = u.grid.point(p);
        Point y = {sg.lambda * x[0], sg.lambda * x[1]};
        bool outside = false;
        for (int l = 0; l < u.grid.dim; ++l)
            if (std::abs(y[l]) > u.grid.radius) outside = true;
        if (outside) {
            // admissible only if the tail there is negligible
            Point yc = y;
            for (int l = 0; l < u.grid.dim; ++l)
                yc[l] = std::clamp(yc[l], -u.grid.radius, u.grid.radius);
            if (scale * std::abs(interp_value(u, yc)) > 1e-12)
                throw std::invalid_argument(
                    "gauge_chain: rescaled field leaves the box with non-negligible mass");
            out.values[p] = 0.0;
        } else {
            out.values[p] = scale * interp_value(u, y);
        }
    }
    // diagnostic: residual of the gauged equation
    sg.identity_defect = norm_hminus1(residual(out));
    return {sg, out};
}

std::string deficit_to_json(const DeficitReport& r) {
    nlohmann::json j;
    j["deficit"] = r.deficit;
    j["grad_l2_sq"] = r.grad_l2_sq;
    j["entropy"] = r.entropy;
    j["l2"] = r.l2;
    return j.dump();
}

}  // namespace logsob
