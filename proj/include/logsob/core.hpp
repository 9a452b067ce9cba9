// Gaussian extremals, the log-Sobolev deficit, the Euler-Lagrange residual,
// the multi-bubble interaction error E, the nonlinearity N and the gauge
// chain that normalizes critical points onto -Delta u + u = 2 u log|u|.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "logsob/grid.hpp"

namespace logsob {

enum class Gauge { unit_l2, solution };

struct GaussianParams {
    double inverse_variance = 1.0;  // a in exp(-a|x-z|^2/2)
    Point center = {0.0, 0.0};
    Gauge gauge = Gauge::unit_l2;
};

// Samples the Gaussian in the requested gauge. unit_l2 carries amplitude
// (a/pi)^{d/4}; solution requires a = 1 and amplitude e^{(1+d)/2} (this is
// the ground state g of the logarithmic Schroedinger equation).
Field gaussian_extremal(const GaussianParams& params, const Grid& grid);

// d/dx_l of the solution-gauge bubble g(. - center), sampled analytically.
Field dgaussian(const Grid& grid, const Point& center, int axis);

// Sum of solution-gauge bubbles G = sum_i g(. - y_i).
Field bubble_sum(const Grid& grid, const std::vector<Point>& centers);

// log G evaluated stably (log-sum-exp); defined everywhere on the box.
Field log_bubble_sum(const Grid& grid, const std::vector<Point>& centers);

struct DeficitReport {
    double deficit = 0.0;
    double grad_l2_sq = 0.0;
    double entropy = 0.0;  // integral of u^2 log|u|
    double l2 = 0.0;
};

// Log-Sobolev deficit of a unit-L2 field; with normalize set the input is
// first rescaled to unit L2 mass.
DeficitReport deficit(const Field& u, bool normalize);

// -Delta u + u - 2 u log|u| with the t log t := 0 convention.
Field residual(const Field& u);

// E = 2 G log G - 2 sum_i g_i log g_i, evaluated as
// 2 sum_i g_i log1p(sum_{j != i} g_j / g_i) to avoid cancellation.
Field error_term(const std::vector<Point>& centers, const Grid& grid);

// N(rho) = 2 (G+rho) log(G+rho) - 2 G log G - 2 (1 + log G) rho.
// Requires G + rho >= -1e-12 pointwise; tiny negative values are clamped.
Field nonlinear_term(const std::vector<Point>& centers, const Field& rho);

struct ScalingGauge {
    double lambda = 1.0;
    double sigma_u = 0.0;
    double alpha_u = 1.0;
    double identity_defect = 0.0;  // H^-1 size of the gauged Euler-Lagrange residual
};

// Rescales a unit-L2 near-critical field through the Euler-Lagrange gauge
// chain onto the normalized equation; returns the gauge data and the
// transformed field resampled on the same grid.
std::pair<ScalingGauge, Field> gauge_chain(const Field& u);

std::string deficit_to_json(const DeficitReport& r);

}  // namespace logsob
