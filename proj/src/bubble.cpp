#include "logsob/bubble.hpp"

#include <json.hpp>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

#include "../src/internal.hpp"
#include "logsob/core.hpp"
#include "logsob/linearized.hpp"

namespace logsob {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

double min_separation(const std::vector<Point>& cs, int dim) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cs.size(); ++i)
        for (std::size_t j = i + 1; j < cs.size(); ++j) {
            double s = 0.0;
            for (int l = 0; l < dim; ++l) s += (cs[i][l] - cs[j][l]) * (cs[i][l] - cs[j][l]);
            m = std::min(m, std::sqrt(s));
        }
    return m;
}

// Quadrature-weighted H1 representer of w: pairing <psi, w>_{H1} = psi . c(w).
Eigen::VectorXd h1_representer(const Field& w) {
    const Grid& g = w.grid;
    const std::size_t N = g.size();
    const int n = g.points_per_axis;
    auto tw = [&](std::size_t idx) {
        double wt = 1.0;
        if (g.dim == 1) {
            int i = static_cast<int>(idx);
            if (i == 0 || i == n - 1) wt = 0.5;
        } else {
            int ix = static_cast<int>(idx) / n, iy = static_cast<int>(idx) % n;
            if (ix == 0 || ix == n - 1) wt *= 0.5;
            if (iy == 0 || iy == n - 1) wt *= 0.5;
        }
        return wt;
    };
    double cell = g.spacing;
    if (g.dim == 2) cell *= g.spacing;
    Field acc(g);
    for (std::size_t p = 0; p < N; ++p) acc.values[p] = tw(p) * w.values[p];
    for (int l = 0; l < g.dim; ++l) {
        Field dw = apply_gradient(w, l);
        for (std::size_t p = 0; p < N; ++p) dw.values[p] *= tw(p);
        // central-difference matrices are skew-symmetric: D^T = -D
        Field back = apply_gradient(dw, l);
        for (std::size_t p = 0; p < N; ++p) acc.values[p] -= back.values[p];
    }
    Eigen::VectorXd c(static_cast<Eigen::Index>(N));
    for (std::size_t p = 0; p < N; ++p) c[static_cast<Eigen::Index>(p)] = cell * acc.values[p];
    return c;
}

}  // namespace

struct BorderedSolver::Impl {
    Grid grid;
    std::vector<Point> centers;
    std::vector<Field> basis;  // d g samples, center-major axis-minor
    SpMat M;                   // bordered (N+k) x (N+k)
    Eigen::SparseLU<SpMat> lu;
    int k = 0;
};

BorderedSolver::BorderedSolver(const Grid& grid, const std::vector<Point>& centers)
    : impl_(std::make_unique<Impl>()) {
    if (centers.size() < 2)
        throw std::invalid_argument("projected_linear_solve: need >= 2 centers");
    if (min_separation(centers, grid.dim) < 3.0)
        throw std::invalid_argument("projected_linear_solve: centers must be separated by >= 3");
    impl_->grid = grid;
    impl_->centers = centers;
    for (const Point& y : centers)
        for (int l = 0; l < grid.dim; ++l) impl_->basis.push_back(dgaussian(grid, y, l));
    const int k = static_cast<int>(impl_->basis.size());
    impl_->k = k;

    Field lg = log_bubble_sum(grid, centers);
    std::vector<double> V(grid.size());
    for (std::size_t p = 0; p < V.size(); ++p) V[p] = -1.0 - 2.0 * lg.values[p];
    SpMat A = detail::assemble_operator(grid, V);
    const Eigen::Index N = A.rows();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(A.nonZeros() + 2 * static_cast<std::size_t>(N) * k);
    for (int col = 0; col < A.outerSize(); ++col)
        for (SpMat::InnerIterator it(A, col); it; ++it)
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int m = 0; m < k; ++m) {
        const Field& w = impl_->basis[m];
        Eigen::VectorXd c = h1_representer(w);
        for (Eigen::Index p = 0; p < N; ++p) {
            if (w.values[static_cast<std::size_t>(p)] != 0.0)
                trip.emplace_back(static_cast<int>(p), static_cast<int>(N) + m,
                                  w.values[static_cast<std::size_t>(p)]);
            if (c[p] != 0.0)
                trip.emplace_back(static_cast<int>(N) + m, static_cast<int>(p), c[p]);
        }
    }
    impl_->M.resize(static_cast<int>(N) + k, static_cast<int>(N) + k);
    impl_->M.setFromTriplets(trip.begin(), trip.end());
    impl_->M.makeCompressed();
    impl_->lu.compute(impl_->M);
    if (impl_->lu.info() != Eigen::Success)
        throw std::invalid_argument(
            "projected_linear_solve: bordered system is singular (centers too close)");
}

BorderedSolver::~BorderedSolver() = default;
BorderedSolver::BorderedSolver(BorderedSolver&&) noexcept = default;

const std::vector<Field>& BorderedSolver::basis() const { return impl_->basis; }

ProjectedSolveResult BorderedSolver::solve(const Field& rhs) const {
    require_finite(rhs);
    if (!(rhs.grid == impl_->grid))
        throw std::invalid_argument("projected_linear_solve: rhs grid mismatch");
    const Eigen::Index N = static_cast<Eigen::Index>(rhs.size());
    const int k = impl_->k;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(N + k);
    for (Eigen::Index p = 0; p < N; ++p) b[p] = rhs.values[static_cast<std::size_t>(p)];
    Eigen::VectorXd x = impl_->lu.solve(b);
    double nb = b.norm();
    double res = (impl_->M * x - b).norm();
    if (nb > 0.0 && res / nb > 1e-11) {
        Eigen::VectorXd r = b - impl_->M * x;
        x += impl_->lu.solve(r);
        res = (impl_->M * x - b).norm();
        if (res / nb > 1e-11)
            throw solve_error("projected_linear_solve: residual above tolerance", res / nb);
    }
    ProjectedSolveResult out;
    out.psi = Field(impl_->grid);
    for (Eigen::Index p = 0; p < N; ++p) out.psi.values[static_cast<std::size_t>(p)] = x[p];
    out.b.a.assign(k, 0.0);
    for (int m = 0; m < k; ++m) out.b.a[m] = x[N + m];
    out.solve_residual = nb > 0.0 ? res / nb : res;
    return out;
}

ProjectedSolveResult projected_linear_solve(const Grid& grid, const std::vector<Point>& centers,
                                            const Field& rhs) {
    BorderedSolver solver(grid, centers);
    return solver.solve(rhs);
}

BubblePair build_pair(double L, int dim) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("build_pair: dim must be 1 or 2");
    double radius = 0.5 * L + 7.0;
    double target = dim == 1 ? 0.05 : 0.1;
    int n = static_cast<int>(std::lround(2.0 * radius / target)) + 1;
    return build_pair(L, make_grid(dim, radius, n, 4));
}

BubblePair build_pair(double L, const Grid& grid) {
    if (!(L >= 3.0 && L <= 2.0 * grid.radius - 12.0))
        throw std::invalid_argument("build_pair: need 3 <= L <= 2*radius - 12");
    std::vector<Point> centers = {{+0.5 * L, 0.0}, {-0.5 * L, 0.0}};
    BorderedSolver solver(grid, centers);
    Field E = error_term(centers, grid);
    Field G = bubble_sum(grid, centers);

    BubblePair pair;
    pair.L = L;
    pair.grid = grid;
    pair.rho = Field(grid);

    Field rho(grid);
    MultiplierSet mult;
    int it = 0;
    bool converged = false;
    std::vector<double> deltas;
    for (; it < 50; ++it) {
        Field rhs = E + nonlinear_term(centers, rho);
        ProjectedSolveResult sol = solver.solve(rhs);
        Field next = sol.psi;
        // damped fallback when the contraction stalls
        Field diff = next - rho;
        double delta = std::sqrt(std::max(0.0, h1_inner(diff, diff)));
        if (!deltas.empty() && deltas.back() > 0.0 && delta / deltas.back() > 0.9)
            next = 0.5 * (next + rho);
        deltas.push_back(delta);
        double rho_h1 = std::sqrt(std::max(0.0, h1_inner(rho, rho)));
        rho = next;
        mult = sol.b;
        double mn = 0.0;
        for (std::size_t p = 0; p < rho.size(); ++p)
            mn = std::min(mn, G.values[p] + rho.values[p]);
        if (mn < -1e-12)
            throw nonconvergence_error("build_pair: positivity of G + rho lost, min = " +
                                       std::to_string(mn));
        if (delta <= 1e-12 * (1.0 + rho_h1)) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!converged) {
        std::string hist;
        for (double d : deltas) hist += std::to_string(d) + " ";
        throw nonconvergence_error("build_pair: Picard did not converge in 50 iterations: " + hist);
    }

    pair.rho = rho;
    pair.u = G + rho;
    pair.multipliers = mult;
    pair.iterations = it;
    pair.converged = true;
    pair.contraction = deltas;
    pair.f = Field(grid);
    const auto& basis = solver.basis();
    for (std::size_t m = 0; m < basis.size(); ++m)
        for (std::size_t p = 0; p < pair.f.size(); ++p)
            pair.f.values[p] -= mult.a[m] * basis[m].values[p];
    pair.min_u = *std::min_element(pair.u.values.begin(), pair.u.values.end());
    pair.rho_h1 = std::sqrt(std::max(0.0, h1_inner(rho, rho)));
    PartitionGeometry geom = partition_geometry(grid, centers);
    auto [nat, sharp] = weighted_norms(rho, geom, 0.1);
    pair.natural_norm_rho = nat;
    pair.sharp_norm_rho = sharp;
    return pair;
}

namespace {

// quintic smoothstep, C^2 at both ends
double smooth5(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

}  // namespace

WitnessReport lower_bound_witness(const BubblePair& pair) {
    if (!pair.converged) throw std::invalid_argument("lower_bound_witness: pair not converged");
    const Grid& g = pair.grid;
    const double L = pair.L;
    const Point y1 = {+0.5 * L, 0.0};
    const Point y2 = {-0.5 * L, 0.0};
    const double eta = L;
    // cut-off centered near the mid-plane, nudged along y2 - y1
    const double off = (2.0 * std::log(eta) / (eta * eta)) * (y2[0] - y1[0]);
    Point c = {0.5 * (y1[0] + y2[0]) + off, 0.0};
    for (int l = 0; l < g.dim; ++l)
        if (std::abs(c[l]) + 2.0 > g.radius)
            throw std::invalid_argument("lower_bound_witness: offset point outside box");

    const double amp = std::exp(0.5 * (1.0 + g.dim));
    Field psi_hat = sample(g, [&](const Point& x) {
        double r2 = 0.0;
        for (int l = 0; l < g.dim; ++l) r2 += (x[l] - c[l]) * (x[l] - c[l]);
        double r = std::sqrt(r2);
        double bump = r <= 1.0 ? 1.0 : (r >= 2.0 ? 0.0 : 1.0 - smooth5(r - 1.0));
        if (bump == 0.0) return 0.0;
        double d1 = 0.0;
        for (int l = 0; l < g.dim; ++l) d1 += (x[l] - y1[l]) * (x[l] - y1[l]);
        return bump * amp * std::exp(-0.5 * d1);
    });

    WitnessReport w;
    w.offset = off;
    w.pairing_f = l2_inner(pair.f, psi_hat);
    Field E = error_term({y1, y2}, g);
    w.integral_E = l2_inner(E, psi_hat);
    w.psi_h1 = std::sqrt(std::max(0.0, h1_inner(psi_hat, psi_hat)));
    w.lower_bound = w.psi_h1 > 0.0 ? std::abs(w.pairing_f) / w.psi_h1 : 0.0;
    w.fnorm_hminus1 = norm_hminus1(pair.f);
    return w;
}

std::string bubble_to_json(const BubblePair& pair) {
    nlohmann::json j;
    j["L"] = pair.L;
    j["dim"] = pair.grid.dim;
    j["radius"] = pair.grid.radius;
    j["points_per_axis"] = pair.grid.points_per_axis;
    j["iterations"] = pair.iterations;
    j["converged"] = pair.converged;
    j["multipliers"] = pair.multipliers.a;
    j["sharp_norm_rho"] = pair.sharp_norm_rho;
    j["natural_norm_rho"] = pair.natural_norm_rho;
    j["min_u"] = pair.min_u;
    j["rho_h1"] = pair.rho_h1;
    j["contraction"] = pair.contraction;
    return j.dump();
}

std::string witness_to_json(const WitnessReport& w) {
    nlohmann::json j;
    j["pairing_f"] = w.pairing_f;
    j["integral_E"] = w.integral_E;
    j["psi_h1"] = w.psi_h1;
    j["lower_bound"] = w.lower_bound;
    j["fnorm_hminus1"] = w.fnorm_hminus1;
    j["offset"] = w.offset;
    return j.dump();
}

}  // namespace logsob
