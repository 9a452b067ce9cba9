// The two-bubble optimality construction: projected linear theory (bordered
// saddle solve), the Picard fixed point for rho_L, assembly of u_L and f_L,
// and the cut-off lower-bound witness.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "logsob/grid.hpp"
#include "logsob/norms.hpp"

namespace logsob {

struct MultiplierSet {
    std::vector<double> a;  // center-major, axis-minor: a[i*d + l]
};

struct ProjectedSolveResult {
    Field psi;
    MultiplierSet b;
    double solve_residual = 0.0;
};

// Solves L_f psi + sum b_{j,i} d_xj g_i = rhs with <psi, d_xj g_i>_{H1} = 0.
// Multiplier columns enter with the L2 pairing, constraints with H1.
class BorderedSolver {
  public:
    BorderedSolver(const Grid& grid, const std::vector<Point>& centers);
    ~BorderedSolver();
    BorderedSolver(BorderedSolver&&) noexcept;

    ProjectedSolveResult solve(const Field& rhs) const;

    const std::vector<Field>& basis() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

ProjectedSolveResult projected_linear_solve(const Grid& grid, const std::vector<Point>& centers,
                                            const Field& rhs);

struct BubblePair {
    double L = 0.0;
    Grid grid;
    Field rho;  // corrector rho_L
    Field u;    // g_L + g_{-L} + rho_L
    Field f;    // -sum a d g (the Euler-Lagrange residual by construction)
    MultiplierSet multipliers;
    int iterations = 0;
    bool converged = false;
    double sharp_norm_rho = 0.0;
    double natural_norm_rho = 0.0;
    double min_u = 0.0;
    double rho_h1 = 0.0;
    std::vector<double> contraction;  // ||rho^{k+1} - rho^k||_{H1} per iterate
};

// Auto grid policy: radius = L/2 + 7, spacing <= 0.05 in d = 1 (0.1 in d = 2).
BubblePair build_pair(double L, int dim = 1);
BubblePair build_pair(double L, const Grid& grid);

struct WitnessReport {
    double pairing_f = 0.0;       // <f, psi_hat>
    double integral_E = 0.0;      // int E psi_hat
    double psi_h1 = 0.0;          // ||psi_hat||_{H1}
    double lower_bound = 0.0;     // |<f, psi_hat>| / ||psi_hat||_{H1}
    double fnorm_hminus1 = 0.0;   // ||f||_{H^-1} for comparison
    double offset = 0.0;          // axial offset of the cut-off center
};

WitnessReport lower_bound_witness(const BubblePair& pair);

std::string bubble_to_json(const BubblePair& pair);
std::string witness_to_json(const WitnessReport& w);

}  // namespace logsob
