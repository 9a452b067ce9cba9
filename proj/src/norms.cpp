#include "logsob/norms.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace logsob {

NormReport norms(const Field& u) {
    require_finite(u);
    NormReport r;
    double l2sq = l2_inner(u, u);
    double gradsq = 0.0;
    for (int l = 0; l < u.grid.dim; ++l) {
        Field d = apply_gradient(u, l);
        gradsq += l2_inner(d, d);
    }
    r.l2 = std::sqrt(std::max(0.0, l2sq));
    r.grad_l2 = std::sqrt(std::max(0.0, gradsq));
    r.h1 = std::sqrt(std::max(0.0, l2sq + gradsq));
    return r;
}

double norm_hminus1(const Field& f) {
    Field w = helmholtz_solve(f);
    return std::sqrt(std::max(0.0, l2_inner(f, w)));
}

namespace {

double dist_sq(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int l = 0; l < dim; ++l) s += (a[l] - b[l]) * (a[l] - b[l]);
    return s;
}

}  // namespace

PartitionGeometry partition_geometry(const Grid& grid, const std::vector<Point>& centers) {
    if (centers.empty()) throw std::invalid_argument("partition_geometry: need >= 1 center");
    for (const Point& c : centers)
        for (int l = 0; l < grid.dim; ++l)
            if (std::abs(c[l]) > grid.radius - 2.0)
                throw std::invalid_argument("partition_geometry: center outside box margin 2");

    const std::size_t nu = centers.size();
    PartitionGeometry geom;
    geom.grid = grid;
    geom.centers = centers;

    geom.stats.eta_pair.assign(nu, std::vector<double>(nu, 0.0));
    geom.stats.eta_per_center.assign(nu, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < nu; ++i)
        for (std::size_t j = 0; j < nu; ++j) {
            if (i == j) continue;
            double d = std::sqrt(dist_sq(centers[i], centers[j], grid.dim));
            geom.stats.eta_pair[i][j] = d;
            geom.stats.eta_per_center[i] = std::min(geom.stats.eta_per_center[i], d);
        }
    geom.stats.eta = std::numeric_limits<double>::infinity();
    for (double e : geom.stats.eta_per_center) geom.stats.eta = std::min(geom.stats.eta, e);

    const std::size_t N = grid.size();
    geom.voronoi_label.assign(N, 0);
    geom.pair_label.assign(N, -1);
    geom.axial.assign(N, 0.0);
    geom.transverse_sq.assign(N, 0.0);

    // comparisons carry a relative guard so that grid-exact ties stay ties
    // after the whole configuration is translated by grid steps
    const double tie = 1e-12;
    for (std::size_t p = 0; p < N; ++p) {
        Point x = grid.point(p);
        // Voronoi cell: equal-width Gaussians compare by distance; ties to lowest index.
        double bestd = dist_sq(x, centers[0], grid.dim);
        for (std::size_t i = 1; i < nu; ++i)
            bestd = std::min(bestd, dist_sq(x, centers[i], grid.dim));
        int best = 0;
        for (std::size_t i = 0; i < nu; ++i)
            if (dist_sq(x, centers[i], grid.dim) <= bestd + tie * (1.0 + bestd)) {
                best = static_cast<int>(i);
                break;
            }
        geom.voronoi_label[p] = best;
        if (nu == 1) continue;

        // Dominant transverse Gaussian: minimize |P_perp(x - y_i)|^2 over j != i.
        const Point& yi = centers[best];
        auto transverse = [&](std::size_t j) {
            if (grid.dim == 1) return 0.0;
            double ex = centers[j][0] - yi[0], ey = centers[j][1] - yi[1];
            double len = std::sqrt(ex * ex + ey * ey);
            ex /= len;
            ey /= len;
            double rx = x[0] - yi[0], ry = x[1] - yi[1];
            double t = rx * ex + ry * ey;
            return std::max(0.0, (rx * rx + ry * ry) - t * t);
        };
        double besttr = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nu; ++j)
            if (static_cast<int>(j) != best) besttr = std::min(besttr, transverse(j));
        int bestj = -1;
        for (std::size_t j = 0; j < nu; ++j) {
            if (static_cast<int>(j) == best) continue;
            if (transverse(j) <= besttr + tie * (1.0 + besttr)) {
                bestj = static_cast<int>(j);
                break;  // ascending j: tie goes to the lowest index
            }
        }
        geom.pair_label[p] = bestj;
        const Point& yj = centers[bestj];
        double ex = yj[0] - yi[0], ey = (grid.dim == 2) ? yj[1] - yi[1] : 0.0;
        double len = std::sqrt(ex * ex + ey * ey);
        ex /= len;
        ey /= len;
        double mx = 0.5 * (yi[0] + yj[0]), my = 0.5 * (yi[1] + yj[1]);
        double t = (x[0] - mx) * ex + ((grid.dim == 2) ? (x[1] - my) * ey : 0.0);
        geom.axial[p] = t;
        geom.transverse_sq[p] = std::max(0.0, besttr);
    }
    return geom;
}

std::pair<double, double> weighted_norms(const Field& u, const PartitionGeometry& geom,
                                         double sigma) {
    if (geom.centers.size() < 2)
        throw std::invalid_argument("weighted_norms: need >= 2 centers");
    if (!(sigma > 0.0 && sigma <= 0.25))
        throw std::invalid_argument("weighted_norms: sigma must be in (0, 0.25]");
    if (!(u.grid == geom.grid))
        throw std::invalid_argument("weighted_norms: field/geometry grid mismatch");

    const int dim = u.grid.dim;
    const double eta = geom.stats.eta;
    const double half_amp = 0.5 * (1.0 + dim);  // log of e^{(1+d)/2}
    // a small absolute guard keeps threshold membership of grid-exact axial
    // coordinates stable under translations of the whole configuration
    const double nat_cut = sigma * eta + 1e-9;
    const double sharp_cut = sigma * eta - 1.0 + 1e-9;

    // per-(i,j) pair sups: [outer_nat, slab_nat, outer_sharp, slab_sharp]
    std::map<std::pair<int, int>, std::array<double, 4>> sup;
    const std::size_t N = u.size();
    for (std::size_t p = 0; p < N; ++p) {
        int i = geom.voronoi_label[p];
        int j = geom.pair_label[p];
        if (j < 0) continue;
        double au = std::abs(u.values[p]);
        auto& s = sup[{i, j}];
        Point x = u.grid.point(p);
        double r2 = 0.0;
        for (int l = 0; l < dim; ++l) {
            double d = x[l] - geom.centers[i][l];
            r2 += d * d;
        }
        double t = geom.axial[p];
        double eta_ij = geom.stats.eta_pair[i][j];
        // outer: |u| / g(x - y_i)^{1-sigma}
        double outer = (au == 0.0) ? 0.0 : au * std::exp((1.0 - sigma) * (0.5 * r2 - half_amp));
        // slab: |u| / (e^{-(eta_ij^2 - eta^2)/8} * e^{(1+d)/2 - |z|^2/2})
        double slab = (au == 0.0) ? 0.0
                                  : au * std::exp((eta_ij * eta_ij - eta * eta) / 8.0 - half_amp +
                                                  0.5 * geom.transverse_sq[p]);
        if (std::abs(t) > nat_cut)
            s[0] = std::max(s[0], outer);
        else
            s[1] = std::max(s[1], slab);
        if (std::abs(t) > sharp_cut)
            s[2] = std::max(s[2], outer);
        else
            s[3] = std::max(s[3], slab * eta * eta);
    }
    double natural = 0.0, sharp = 0.0;
    for (const auto& [key, s] : sup) {
        natural += s[0] + s[1];
        sharp += s[2] + s[3];
    }
    return {natural, sharp};
}

std::string partition_to_json(const PartitionGeometry& geom) {
    nlohmann::json j;
    j["dim"] = geom.grid.dim;
    nlohmann::json cs = nlohmann::json::array();
    for (const Point& c : geom.centers) {
        if (geom.grid.dim == 1)
            cs.push_back({c[0]});
        else
            cs.push_back({c[0], c[1]});
    }
    j["centers"] = cs;
    if (std::isfinite(geom.stats.eta)) {
        j["eta"] = geom.stats.eta;
        j["eta_per_center"] = geom.stats.eta_per_center;
        j["eta_pair"] = geom.stats.eta_pair;
    } else {
        j["eta"] = nullptr;  // single bubble: separation undefined
    }
    return j.dump();
}

}  // namespace logsob
