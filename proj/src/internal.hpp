// Shared assembly helpers (not part of the public surface).
#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "logsob/grid.hpp"

namespace logsob::detail {

// -Delta_h + diag(potential) with the grid's stencil, zero extension.
Eigen::SparseMatrix<double> assemble_operator(const Grid& g, const std::vector<double>& potential);

}  // namespace logsob::detail
