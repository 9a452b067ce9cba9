// H1 distance to the manifold of sums of translated ground-state bubbles:
// Gauss-Newton center fitting and the energy-window bubble count detection.
#pragma once

#include <string>
#include <vector>

#include "logsob/grid.hpp"

namespace logsob {

struct FitResult {
    std::vector<Point> centers;
    Field rho;                            // u - sum_i g(. - z_i)
    double dist_h1 = 0.0;
    std::vector<double> ortho_residuals;  // <rho, d_xl g_i>_{H1}
    int iterations = 0;
    bool converged = false;
};

// Minimizes ||u - sum_i g(. - z_i)||_{H1}^2 over the nu centers by
// Gauss-Newton with backtracking; stationarity equals the H1 orthogonality
// conditions. Aborts (converged = false) if centers collide below 0.5.
FitResult fit_distance(const Field& u, int nu, std::vector<Point> init_centers);

struct StruweResult {
    int nu = 0;
    FitResult fit;
    double energy_h1_sq = 0.0;
    double c0 = 0.0;        // ||g||_{H1}^2 on the same grid
    int peak_count = 0;     // diagnostic only; never overrides the window
    bool poor_fit = false;  // dist^2 above 5% of nu * c0
};

// Detects nu from the half-width energy windows ((nu-1/2) c0, (nu+1/2) c0),
// seeds centers from separated local maxima and runs fit_distance.
StruweResult struwe_decompose(const Field& u);

// Peak-seeded initial centers for a prescribed nu (local maxima above
// 0.5 max(u), greedily separated by >= 2, padded with axial offsets).
std::vector<Point> seed_centers(const Field& u, int nu);

std::string fit_to_json(const FitResult& r);
std::string struwe_to_json(const StruweResult& r);

}  // namespace logsob
