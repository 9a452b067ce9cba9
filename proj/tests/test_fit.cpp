// Manifold fitting: Gauss-Newton distance, Struwe detection, edge cases.
#include <doctest.h>

#include <cmath>

#include "logsob/core.hpp"
#include "logsob/fit.hpp"
#include "logsob/norms.hpp"
#include "logsob/rng.hpp"

using namespace logsob;

namespace {

Field ground_state(const Grid& g, Point z = {0.0, 0.0}) {
    GaussianParams gp;
    gp.gauge = Gauge::solution;
    gp.center = z;
    return gaussian_extremal(gp, g);
}

}  // namespace

TEST_CASE("exact sums are recovered from perturbed initializations") {
    Grid g = make_grid(1, 10.0, 401, 4);
    Field u = bubble_sum(g, {{4.0, 0.0}, {-4.0, 0.0}});
    FitResult r = fit_distance(u, 2, {{4.3, 0.0}, {-3.7, 0.0}});
    CHECK(r.converged);
    CHECK(r.dist_h1 <= 1e-8);
    CHECK(std::abs(r.centers[0][0] - 4.0) <= 1e-8);
    CHECK(std::abs(r.centers[1][0] + 4.0) <= 1e-8);

    // minimizer beats its own starting point
    double J0 = [&] {
        Field res = u - bubble_sum(g, {{4.3, 0.0}, {-3.7, 0.0}});
        return std::sqrt(h1_inner(res, res));
    }();
    CHECK(r.dist_h1 <= J0);
}

TEST_CASE("first-order perturbation: distance tracks the perturbation size") {
    Grid g = make_grid(1, 10.0, 401, 4);
    Field u0 = bubble_sum(g, {{4.0, 0.0}, {-4.0, 0.0}});
    Rng rng(777);
    Field w = random_unit_h1(g, rng);
    Field we(g);  // even part keeps the problem symmetric
    int n = g.points_per_axis;
    for (int i = 0; i < n; ++i) we.values[i] = 0.5 * (w.values[i] + w.values[n - 1 - i]);
    we = (1.0 / std::sqrt(h1_inner(we, we))) * we;
    const double eps = 1e-3;
    Field u = u0 + eps * we;
    FitResult r = fit_distance(u, 2, {{3.7, 0.0}, {-4.3, 0.0}});
    CHECK(r.converged);
    CHECK(r.dist_h1 <= eps);
    double uh1 = std::sqrt(h1_inner(u, u));
    for (double o : r.ortho_residuals) CHECK(std::abs(o) <= 1e-9 * (1.0 + uh1));
}

TEST_CASE("fitted distance is translation equivariant") {
    Grid g = make_grid(1, 10.0, 401, 4);
    double h = g.spacing;
    Rng rng(99);
    Field w = random_unit_h1(g, rng);
    Field u = bubble_sum(g, {{3.0, 0.0}, {-3.0, 0.0}}) + 5e-3 * w;
    // same field sampled one grid step to the right
    Field ush(g);
    for (int i = 1; i < g.points_per_axis; ++i) ush.values[i] = u.values[i - 1];
    FitResult a = fit_distance(u, 2, {{3.2, 0.0}, {-2.8, 0.0}});
    FitResult b = fit_distance(ush, 2, {{3.2 + h, 0.0}, {-2.8 + h, 0.0}});
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(a.dist_h1 == doctest::Approx(b.dist_h1).epsilon(1e-7));
    CHECK(b.centers[0][0] - a.centers[0][0] == doctest::Approx(h).epsilon(1e-6));
}

TEST_CASE("fit contracts and aborts") {
    Grid g = make_grid(1, 10.0, 401, 4);
    Field u = bubble_sum(g, {{4.0, 0.0}, {-4.0, 0.0}});
    CHECK_THROWS_AS(fit_distance(u, 0, {}), std::invalid_argument);
    CHECK_THROWS_AS(fit_distance(u, 2, {{4.0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_distance(u, 2, {{0.4, 0.0}, {-0.4, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_distance(u, 1, {{9.5, 0.0}}), std::invalid_argument);

    // the best two-bubble representation of this target collides
    Field tight = bubble_sum(g, {{0.2, 0.0}, {-0.2, 0.0}});
    FitResult r = fit_distance(tight, 2, {{0.55, 0.0}, {-0.55, 0.0}});
    CHECK(!r.converged);
}

TEST_CASE("struwe decomposition on near-critical inputs") {
    Grid g = make_grid(1, 10.0, 401, 4);
    StruweResult s1 = struwe_decompose(ground_state(g));
    CHECK(s1.nu == 1);
    CHECK(s1.fit.dist_h1 <= 1e-8);
    CHECK(!s1.poor_fit);

    Field two = bubble_sum(g, {{4.0, 0.0}, {-4.0, 0.0}});
    StruweResult s2 = struwe_decompose(two);
    CHECK(s2.nu == 2);
    CHECK(s2.fit.converged);
    CHECK(s2.fit.dist_h1 <= 1e-8);
    CHECK(std::abs(std::abs(s2.fit.centers[0][0]) - 4.0) <= 1e-8);
    CHECK(std::abs(std::abs(s2.fit.centers[1][0]) - 4.0) <= 1e-8);
    double uh1 = std::sqrt(h1_inner(two, two));
    for (double o : s2.fit.ortho_residuals) CHECK(std::abs(o) <= 1e-9 * (1.0 + uh1));
}

TEST_CASE("struwe window behavior off the manifold") {
    Grid g = make_grid(1, 10.0, 401, 4);
    // 1.69 c0 lands in the nu = 2 window; the fit is valid but poor
    Field u = 1.3 * ground_state(g);
    StruweResult s = struwe_decompose(u);
    CHECK(s.nu == 2);
    CHECK(s.energy_h1_sq == doctest::Approx(1.69 * s.c0).epsilon(1e-9));
    CHECK(s.poor_fit);
    CHECK(s.fit.dist_h1 > 1.0);

    // below every window
    CHECK_THROWS_AS(struwe_decompose(0.5 * ground_state(g)), std::invalid_argument);
    // negative inputs are rejected
    CHECK_THROWS_AS(struwe_decompose(-1.0 * ground_state(g)), std::invalid_argument);
}

TEST_CASE("fit result serializes") {
    Grid g = make_grid(1, 10.0, 401, 4);
    StruweResult s = struwe_decompose(ground_state(g));
    std::string j = struwe_to_json(s);
    CHECK(j.find("\"nu\":1") != std::string::npos);
    CHECK(j.find("dist_h1") != std::string::npos);
    CHECK(j.find("converged") != std::string::npos);
}
