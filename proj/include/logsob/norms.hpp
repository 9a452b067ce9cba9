// Sobolev norms, bubble separation statistics, the Voronoi/slab partition
// geometry and the weighted sup-norms that resolve the interaction region.
#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "logsob/grid.hpp"

namespace logsob {

struct NormReport {
    double l2 = 0.0;
    double h1 = 0.0;
    double grad_l2 = 0.0;
};

NormReport norms(const Field& u);

// Dual norm sqrt(<f, (-Delta+1)^{-1} f>) on the truncated box.
double norm_hminus1(const Field& f);

struct SeparationStats {
    std::vector<std::vector<double>> eta_pair;  // symmetric, zero diagonal
    std::vector<double> eta_per_center;         // min over j != i; +inf when nu = 1
    double eta = std::numeric_limits<double>::infinity();
};

// Bubble centers with their Voronoi cells, dominant-pair labels and pairwise
// axial/transverse coordinates. Ties go to the lowest center index.
struct PartitionGeometry {
    Grid grid;
    std::vector<Point> centers;
    std::vector<int> voronoi_label;      // per grid point: cell index i
    std::vector<int> pair_label;         // per grid point: dominant j, -1 if none
    std::vector<double> axial;           // t_ij(x) for the point's own (i, j)
    std::vector<double> transverse_sq;   // |x - y_i|^2 minus axial-line part
    SeparationStats stats;
};

PartitionGeometry partition_geometry(const Grid& grid, const std::vector<Point>& centers);

// (natural, sharp) weighted sup-norms of u over the partition; sigma in (0, 0.25].
std::pair<double, double> weighted_norms(const Field& u, const PartitionGeometry& geom,
                                         double sigma);

std::string partition_to_json(const PartitionGeometry& geom);

}  // namespace logsob
