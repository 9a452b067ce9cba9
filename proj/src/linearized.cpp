#include "logsob/linearized.hpp"

#include <json.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../src/internal.hpp"
#include "logsob/core.hpp"

namespace logsob {

namespace {

std::vector<double> potential_values(LinKind kind, const std::vector<Point>& centers,
                                     const Grid& grid) {
    std::vector<double> V(grid.size());
    if (kind == LinKind::oscillator) {
        for (std::size_t p = 0; p < V.size(); ++p) {
            Point x = grid.point(p);
            double r2 = x[0] * x[0] + (grid.dim == 2 ? x[1] * x[1] : 0.0);
            V[p] = r2 - (grid.dim + 2);
        }
    } else {
        if (centers.empty())
            throw std::invalid_argument("apply_linearized: around_bubbles needs >= 1 center");
        Field lg = log_bubble_sum(grid, centers);
        for (std::size_t p = 0; p < V.size(); ++p) V[p] = -1.0 - 2.0 * lg.values[p];
    }
    return V;
}

using SpMat = Eigen::SparseMatrix<double>;

Field unit_l2_field(const Grid& grid, const Eigen::VectorXd& v) {
    Field f(grid);
    Eigen::Map<Eigen::VectorXd>(f.values.data(), v.size()) = v;
    double n = std::sqrt(std::max(l2_inner(f, f), 0.0));
    if (n > 0.0) {
        // deterministic sign: largest-magnitude entry positive
        Eigen::Index imax;
        v.cwiseAbs().maxCoeff(&imax);
        double s = v[imax] >= 0.0 ? 1.0 : -1.0;
        for (double& x : f.values) x *= s / n;
    }
    return f;
}

// Shift-invert Lanczos with full reorthogonalization (deterministic start).
struct LanczosResult {
    std::vector<double> eigenvalues;
    std::vector<Eigen::VectorXd> vectors;
};

LanczosResult lanczos_shift_invert(const SpMat& A, double sigma, int count, int steps) {
    const Eigen::Index N = A.rows();
    SpMat As = A;
    for (Eigen::Index i = 0; i < N; ++i) As.coeffRef(i, i) -= sigma;
    Eigen::SimplicialLDLT<SpMat> ldlt(As);
    if (ldlt.info() != Eigen::Success)
        throw solve_error("spectrum: shift-invert factorization failed", std::nan(""));

    std::vector<Eigen::VectorXd> V;
    Eigen::VectorXd v(N);
    // fixed quasi-random start vector
    for (Eigen::Index i = 0; i < N; ++i)
        v[i] = std::sin(0.7 * static_cast<double>(i) + 0.31) + 1e-3;
    v.normalize();
    std::vector<double> alpha, beta;
    Eigen::VectorXd vprev = Eigen::VectorXd::Zero(N);
    double b = 0.0;
    int m = std::min<int>(steps, static_cast<int>(N));
    for (int k = 0; k < m; ++k) {
        V.push_back(v);
        Eigen::VectorXd w = ldlt.solve(v);
        double a = v.dot(w);
        w -= a * v + b * vprev;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : V) w -= q.dot(w) * q;
        alpha.push_back(a);
        b = w.norm();
        beta.push_back(b);
        if (b < 1e-14) break;
        vprev = v;
        v = w / b;
    }
    int mm = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(mm, mm);
    for (int i = 0; i < mm; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < mm) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    // largest theta of (A - sigma)^{-1} are the eigenvalues closest above sigma
    LanczosResult out;
    int take = std::min(count, mm);
    for (int r = 0; r < take; ++r) {
        int idx = mm - 1 - r;
        double theta = es.eigenvalues()[idx];
        if (theta <= 0.0) break;
        Eigen::VectorXd y = es.eigenvectors().col(idx);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
        for (int i = 0; i < mm; ++i) x += y[i] * V[i];
        x.normalize();
        out.eigenvalues.push_back(sigma + 1.0 / theta);
        out.vectors.push_back(std::move(x));
    }
    return out;
}

}  // namespace

Field apply_linearized(LinKind kind, const std::vector<Point>& centers, const Field& u) {
    require_finite(u);
    std::vector<double> V = potential_values(kind, centers, u.grid);
    Field lap = apply_laplacian(u);
    Field out(u.grid);
    for (std::size_t p = 0; p < u.size(); ++p)
        out.values[p] = -lap.values[p] + V[p] * u.values[p];
    return out;
}

SpectralReport spectrum(LinKind kind, const std::vector<Point>& centers, const Grid& grid,
                        int count) {
    if (count < 1 || count > 20) throw std::invalid_argument("spectrum: count must be in 1..20");
    std::vector<double> V = potential_values(kind, centers, grid);
    SpMat A = detail::assemble_operator(grid, V);

    std::vector<double> evals;
    std::vector<Eigen::VectorXd> evecs;
    if (grid.dim == 1) {
        Eigen::MatrixXd D(A);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
        if (es.info() != Eigen::Success) throw solve_error("spectrum: dense eigensolve failed", 0);
        for (int r = 0; r < count; ++r) {
            evals.push_back(es.eigenvalues()[r]);
            evecs.push_back(es.eigenvectors().col(r));
        }
    } else {
        LanczosResult lr = lanczos_shift_invert(A, -4.0, count, std::max(120, 8 * count));
        if (static_cast<int>(lr.eigenvalues.size()) < count)
            throw solve_error("spectrum: Lanczos returned too few pairs",
                              static_cast<double>(lr.eigenvalues.size()));
        evals = std::move(lr.eigenvalues);
        evecs = std::move(lr.vectors);
        // ascending
        std::vector<int> order(evals.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return evals[a] < evals[b]; });
        std::vector<double> ev2;
        std::vector<Eigen::VectorXd> vec2;
        for (int i : order) {
            ev2.push_back(evals[i]);
            vec2.push_back(std::move(evecs[i]));
        }
        evals = std::move(ev2);
        evecs = std::move(vec2);
    }

    SpectralReport rep;
    for (int r = 0; r < count; ++r) {
        Field f = unit_l2_field(grid, evecs[r]);
        Eigen::Map<const Eigen::VectorXd> fv(f.values.data(), static_cast<Eigen::Index>(f.size()));
        Eigen::VectorXd Av = A * fv;
        Field res(grid);
        for (std::size_t p = 0; p < f.size(); ++p)
            res.values[p] = Av[static_cast<Eigen::Index>(p)] - evals[r] * f.values[p];
        rep.eigenvalues.push_back(evals[r]);
        rep.residuals.push_back(std::sqrt(std::max(0.0, l2_inner(res, res))));
        rep.eigenfields.push_back(std::move(f));
    }
    return rep;
}

ProjectionBasis make_projection_basis(const Grid& grid, const std::vector<Point>& centers) {
    if (centers.empty()) throw std::invalid_argument("make_projection_basis: need >= 1 center");
    ProjectionBasis b;
    b.grid = grid;
    b.centers = centers;
    for (const Point& y : centers)
        for (int l = 0; l < grid.dim; ++l) b.translation_fields.push_back(dgaussian(grid, y, l));
    for (const Point& y : centers) b.radial_fields.push_back(bubble_sum(grid, {y}));
    const int nt = static_cast<int>(b.translation_fields.size());
    b.gram_h1.resize(nt, nt);
    for (int i = 0; i < nt; ++i)
        for (int j = i; j < nt; ++j)
            b.gram_h1(i, j) = b.gram_h1(j, i) =
                h1_inner(b.translation_fields[i], b.translation_fields[j]);
    const int na = nt + static_cast<int>(b.radial_fields.size());
    auto field_at = [&](int k) -> const Field& {
        return k < nt ? b.translation_fields[k] : b.radial_fields[k - nt];
    };
    b.gram_l2.resize(na, na);
    for (int i = 0; i < na; ++i)
        for (int j = i; j < na; ++j)
            b.gram_l2(i, j) = b.gram_l2(j, i) = l2_inner(field_at(i), field_at(j));
    return b;
}

Field projection(const Field& u, const ProjectionBasis& basis, Pairing pairing, Span span) {
    if (!(u.grid == basis.grid)) throw std::invalid_argument("projection: grid mismatch");
    std::vector<const Field*> fields;
    for (const Field& f : basis.translation_fields) fields.push_back(&f);
    if (span == Span::translations_and_radial)
        for (const Field& f : basis.radial_fields) fields.push_back(&f);
    const int k = static_cast<int>(fields.size());
    auto pair = [&](const Field& a, const Field& b) {
        return pairing == Pairing::l2 ? l2_inner(a, b) : h1_inner(a, b);
    };
    Eigen::MatrixXd G(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) G(i, j) = G(j, i) = pair(*fields[i], *fields[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    double emin = es.eigenvalues()[0], emax = es.eigenvalues()[k - 1];
    if (!(emin > 0.0) || emax / emin > 1e12)
        throw std::invalid_argument("projection: Gram matrix too ill-conditioned (centers too close)");
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);

    Field out = u;
    // two sweeps pin the pairing residual near machine precision
    for (int sweep = 0; sweep < 2; ++sweep) {
        Eigen::VectorXd rhs(k);
        for (int i = 0; i < k; ++i) rhs[i] = pair(out, *fields[i]);
        Eigen::VectorXd c = ldlt.solve(rhs);
        for (int i = 0; i < k; ++i)
            for (std::size_t p = 0; p < out.size(); ++p)
                out.values[p] -= c[i] * fields[i]->values[p];
    }
    return out;
}

namespace {

// Euclidean-orthonormal basis of the span (value vectors); the span is all
// that matters for the complement.
Eigen::MatrixXd orthonormal_span(const Grid& grid, const std::vector<Point>& centers,
                                 Span removed) {
    std::vector<Field> fields;
    for (const Point& y : centers)
        for (int l = 0; l < grid.dim; ++l) fields.push_back(dgaussian(grid, y, l));
    if (removed == Span::translations_and_radial)
        for (const Point& y : centers) fields.push_back(bubble_sum(grid, {y}));
    const Eigen::Index N = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd S(N, static_cast<Eigen::Index>(fields.size()));
    for (std::size_t j = 0; j < fields.size(); ++j)
        S.col(static_cast<Eigen::Index>(j)) =
            Eigen::Map<const Eigen::VectorXd>(fields[j].values.data(), N);
    // modified Gram-Schmidt, twice
    for (Eigen::Index j = 0; j < S.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < j; ++i) S.col(j) -= S.col(i).dot(S.col(j)) * S.col(i);
        S.col(j).normalize();
    }
    return S;
}

}  // namespace

double coercivity_gap(const Grid& grid, const std::vector<Point>& centers, Span removed) {
    if (centers.empty()) throw std::invalid_argument("coercivity_gap: need >= 1 center");
    std::vector<double> V = potential_values(LinKind::around_bubbles, centers, grid);
    SpMat A = detail::assemble_operator(grid, V);
    Eigen::MatrixXd Q = orthonormal_span(grid, centers, removed);
    const Eigen::Index N = A.rows(), k = Q.cols();

    if (grid.dim == 1) {
        // explicit complement basis via full QR of the span
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
        Eigen::MatrixXd Qfull = qr.householderQ() * Eigen::MatrixXd::Identity(N, N);
        Eigen::MatrixXd Z = Qfull.rightCols(N - k);
        Eigen::MatrixXd M = Z.transpose() * (A * Z).eval();
        M = 0.5 * (M + M.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        if (es.info() != Eigen::Success)
            throw solve_error("coercivity_gap: eigensolve failed", 0);
        return es.eigenvalues()[0];
    }

    // d = 2: projected inverse iteration about a shift below the spectrum.
    const double sigma = -8.0;
    SpMat As = A;
    for (Eigen::Index i = 0; i < N; ++i) As.coeffRef(i, i) -= sigma;
    auto project = [&](Eigen::VectorXd& x) { x -= Q * (Q.transpose() * x); };
    Eigen::VectorXd x(N);
    for (Eigen::Index i = 0; i < N; ++i) x[i] = std::sin(0.7 * static_cast<double>(i) + 0.31) + 1e-3;
    project(x);
    x.normalize();
    double rq = 0.0;
    for (int it = 0; it < 80; ++it) {
        // CG solve of P (A - sigma) P y = x restricted to the complement
        Eigen::VectorXd y = Eigen::VectorXd::Zero(N);
        Eigen::VectorXd r = x, p = x;
        double rs = r.squaredNorm();
        for (int c = 0; c < 800 && std::sqrt(rs) > 1e-12; ++c) {
            Eigen::VectorXd Ap = As * p;
            project(Ap);
            double al = rs / p.dot(Ap);
            y += al * p;
            r -= al * Ap;
            double rs2 = r.squaredNorm();
            p = r + (rs2 / rs) * p;
            rs = rs2;
        }
        project(y);
        y.normalize();
        Eigen::VectorXd Ay = A * y;
        project(Ay);
        rq = y.dot(Ay);
        x = y;
    }
    return rq;
}

std::string spectral_to_json(const SpectralReport& r) {
    nlohmann::json j;
    j["eigenvalues"] = r.eigenvalues;
    j["residuals"] = r.residuals;
    return j.dump();
}

}  // namespace logsob
