// Linearized operators at the Gaussian ground state and around bubble sums:
// spectra, kernel projections and the coercivity gap on the complement of the
// (near-)kernel directions.
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "logsob/grid.hpp"

namespace logsob {

enum class LinKind {
    oscillator,      // -Delta + |x|^2 - (d+2)
    around_bubbles,  // -Delta - 1 - 2 log(sum_i g(. - y_i))
};

Field apply_linearized(LinKind kind, const std::vector<Point>& centers, const Field& u);

struct SpectralReport {
    std::vector<double> eigenvalues;  // ascending
    std::vector<Field> eigenfields;   // unit L2, pairwise orthonormal
    std::vector<double> residuals;    // ||A v - lambda v||_{L2}
};

SpectralReport spectrum(LinKind kind, const std::vector<Point>& centers, const Grid& grid,
                        int count);

enum class Pairing { l2, h1 };
enum class Span { translations, translations_and_radial };

struct ProjectionBasis {
    Grid grid;
    std::vector<Point> centers;
    std::vector<Field> translation_fields;  // nu*d fields d_xl g(. - y_i), i-major
    std::vector<Field> radial_fields;       // nu fields g(. - y_i)
    Eigen::MatrixXd gram_h1;                // H1 Gram of the translation fields
    Eigen::MatrixXd gram_l2;                // L2 Gram of translations then radial
};

ProjectionBasis make_projection_basis(const Grid& grid, const std::vector<Point>& centers);

// Returns u minus its pairing-orthogonal projection onto the chosen span.
Field projection(const Field& u, const ProjectionBasis& basis, Pairing pairing, Span span);

// Minimum Rayleigh quotient of the around-bubbles operator over the L2
// complement of span{g_i, d g_i} (or translations only).
double coercivity_gap(const Grid& grid, const std::vector<Point>& centers,
                      Span removed = Span::translations_and_radial);

std::string spectral_to_json(const SpectralReport& r);

}  // namespace logsob
