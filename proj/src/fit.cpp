#include "logsob/fit.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "logsob/core.hpp"
#include "logsob/norms.hpp"

namespace logsob {

namespace {

double separation(const std::vector<Point>& zs, int dim) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < zs.size(); ++i)
        for (std::size_t j = i + 1; j < zs.size(); ++j) {
            double s = 0.0;
            for (int l = 0; l < dim; ++l) s += (zs[i][l] - zs[j][l]) * (zs[i][l] - zs[j][l]);
            m = std::min(m, std::sqrt(s));
        }
    return m;
}

Field fit_residual_field(const Field& u, const std::vector<Point>& zs) {
    Field G = bubble_sum(u.grid, zs);
    return u - G;
}

double objective(const Field& u, const std::vector<Point>& zs) {
    Field r = fit_residual_field(u, zs);
    return h1_inner(r, r);
}

}  // namespace

FitResult fit_distance(const Field& u, int nu, std::vector<Point> init_centers) {
    require_finite(u);
    if (nu < 1) throw std::invalid_argument("fit_distance: nu must be >= 1");
    if (static_cast<int>(init_centers.size()) != nu)
        throw std::invalid_argument("fit_distance: init centers must match nu");
    const int dim = u.grid.dim;
    for (const Point& z : init_centers)
        for (int l = 0; l < dim; ++l)
            if (std::abs(z[l]) > u.grid.radius - 2.0)
                throw std::invalid_argument("fit_distance: init center outside interior margin");
    if (nu > 1 && separation(init_centers, dim) < 1.0)
        throw std::invalid_argument("fit_distance: init centers closer than 1");

    const double u_h1 = std::sqrt(h1_inner(u, u));
    const double ortho_tol = 1e-9 * (1.0 + u_h1);
    std::vector<Point> z = init_centers;
    double J = objective(u, z);
    const int k = nu * dim;
    int it = 0;
    bool converged = false;
    bool collided = false;

    for (; it < 100; ++it) {
        Field r = fit_residual_field(u, z);
        // Jacobian columns d r / d z_{i,l} = + d_xl g(. - z_i)
        std::vector<Field> B;
        B.reserve(k);
        for (int i = 0; i < nu; ++i)
            for (int l = 0; l < dim; ++l) B.push_back(dgaussian(u.grid, z[i], l));
        Eigen::VectorXd g(k);
        Eigen::MatrixXd M(k, k);
        for (int a = 0; a < k; ++a) {
            g[a] = h1_inner(r, B[a]);
            for (int b = a; b < k; ++b) M(a, b) = M(b, a) = h1_inner(B[a], B[b]);
        }
        // converged when stationarity holds and the last step was tiny
        double gmax = g.cwiseAbs().maxCoeff();
        Eigen::VectorXd step = M.ldlt().solve(-g);
        double smax = step.cwiseAbs().maxCoeff();
        if (gmax <= ortho_tol && smax < 1e-10) {
            converged = true;
            break;
        }
        // Gauss-Newton with backtracking halving; colliding or exterior step
        // lengths are skipped, not fatal
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half, t *= 0.5) {
            std::vector<Point> zt = z;
            for (int i = 0; i < nu; ++i)
                for (int l = 0; l < dim; ++l) zt[i][l] += t * step[i * dim + l];
            if (nu > 1 && separation(zt, dim) < 0.5) continue;
            bool inside = true;
            for (const Point& p : zt)
                for (int l = 0; l < dim; ++l)
                    if (std::abs(p[l]) > u.grid.radius - 2.0) inside = false;
            if (!inside) continue;
            double Jt = objective(u, zt);
            if (Jt <= J) {
                z = zt;
                J = Jt;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // the remaining descent direction only leads into collision
            collided = nu > 1 && separation(z, dim) < 0.75;
            break;
        }
        if (t * smax < 1e-10) {
            Field r2 = fit_residual_field(u, z);
            double g2 = 0.0;
            for (int a = 0; a < k; ++a)
                g2 = std::max(g2, std::abs(h1_inner(r2, B[a])));
            converged = g2 <= ortho_tol;
            ++it;
            break;
        }
    }

    FitResult out;
    out.centers = z;
    out.rho = fit_residual_field(u, z);
    out.dist_h1 = std::sqrt(std::max(0.0, h1_inner(out.rho, out.rho)));
    for (int i = 0; i < nu; ++i)
        for (int l = 0; l < dim; ++l)
            out.ortho_residuals.push_back(h1_inner(out.rho, dgaussian(u.grid, z[i], l)));
    out.iterations = it;
    out.converged = converged && !collided;
    if (out.converged) {
        for (double o : out.ortho_residuals)
            if (std::abs(o) > ortho_tol) out.converged = false;
    }
    return out;
}

namespace {

std::vector<Point> find_peaks(const Field& u, double min_sep) {
    const Grid& g = u.grid;
    const int n = g.points_per_axis;
    double umax = *std::max_element(u.values.begin(), u.values.end());
    std::vector<std::pair<double, Point>> cand;
    auto val = [&](int ix, int iy) {
        return g.dim == 1 ? u.values[ix] : u.values[static_cast<std::size_t>(ix) * n + iy];
    };
    if (g.dim == 1) {
        for (int i = 1; i + 1 < n; ++i)
            if (u.values[i] >= 0.5 * umax && u.values[i] >= u.values[i - 1] &&
                u.values[i] >= u.values[i + 1])
                cand.push_back({u.values[i], {g.coord(i), 0.0}});
    } else {
        for (int ix = 1; ix + 1 < n; ++ix)
            for (int iy = 1; iy + 1 < n; ++iy) {
                double v = val(ix, iy);
                if (v >= 0.5 * umax && v >= val(ix - 1, iy) && v >= val(ix + 1, iy) &&
                    v >= val(ix, iy - 1) && v >= val(ix, iy + 1))
                    cand.push_back({v, {g.coord(ix), g.coord(iy)}});
            }
    }
    // ties broken lexicographically by coordinates
    std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<Point> out;
    for (const auto& [v, p] : cand) {
        bool ok = true;
        for (const Point& q : out) {
            double s = 0.0;
            for (int l = 0; l < g.dim; ++l) s += (p[l] - q[l]) * (p[l] - q[l]);
            if (std::sqrt(s) < min_sep) ok = false;
        }
        if (ok) out.push_back(p);
    }
    return out;
}

}  // namespace

std::vector<Point> seed_centers(const Field& u, int nu) {
    std::vector<Point> peaks = find_peaks(u, 2.0);
    std::vector<Point> init(peaks.begin(), peaks.begin() + std::min<std::size_t>(peaks.size(), nu));
    // pad with offsets when fewer peaks than bubbles
    int guard = 0;
    while (static_cast<int>(init.size()) < nu) {
        Point base = init.empty() ? Point{0.0, 0.0} : init.back();
        double sgn = (guard % 2 == 0) ? 1.0 : -1.0;
        Point p = base;
        p[0] = std::clamp(base[0] + sgn * 2.5 * (1 + guard / 2), -(u.grid.radius - 2.5),
                          u.grid.radius - 2.5);
        init.push_back(p);
        ++guard;
        if (guard > 2 * nu + 4) break;
    }
    return init;
}

StruweResult struwe_decompose(const Field& u) {
    require_finite(u);
    for (double v : u.values)
        if (v < -1e-10) throw std::invalid_argument("struwe_decompose: field must be >= -1e-10");

    StruweResult res;
    // same-grid c0 cancels the truncation bias of the window edges
    Field g0 = bubble_sum(u.grid, {{0.0, 0.0}});
    res.c0 = h1_inner(g0, g0);
    res.energy_h1_sq = h1_inner(u, u);

    double q = res.energy_h1_sq / res.c0;
    int nu = static_cast<int>(std::lround(q));
    if (nu < 1 || !(res.energy_h1_sq > (nu - 0.5) * res.c0) ||
        !(res.energy_h1_sq < (nu + 0.5) * res.c0)) {
        int nearest = std::max(1, nu);
        throw std::invalid_argument(
            "struwe_decompose: H1 energy " + std::to_string(res.energy_h1_sq) +
            " lies outside every window; nearest window nu=" + std::to_string(nearest) + " is (" +
            std::to_string((nearest - 0.5) * res.c0) + ", " +
            std::to_string((nearest + 0.5) * res.c0) + ")");
    }
    res.nu = nu;

    res.peak_count = static_cast<int>(find_peaks(u, 2.0).size());
    res.fit = fit_distance(u, nu, seed_centers(u, nu));
    res.poor_fit = res.fit.dist_h1 * res.fit.dist_h1 > 0.05 * nu * res.c0;
    return res;
}

std::string fit_to_json(const FitResult& r) {
    nlohmann::json j;
    nlohmann::json cs = nlohmann::json::array();
    for (const Point& c : r.centers) {
        if (r.rho.grid.dim == 1)
            cs.push_back({c[0]});
        else
            cs.push_back({c[0], c[1]});
    }
    j["centers"] = cs;
    j["dist_h1"] = r.dist_h1;
    j["ortho_residuals"] = r.ortho_residuals;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    return j.dump();
}

std::string struwe_to_json(const StruweResult& r) {
    nlohmann::json j = nlohmann::json::parse(fit_to_json(r.fit));
    j["nu"] = r.nu;
    j["energy_h1_sq"] = r.energy_h1_sq;
    j["c0"] = r.c0;
    j["peak_count"] = r.peak_count;
    j["poor_fit"] = r.poor_fit;
    return j.dump();
}

}  // namespace logsob
