#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace latticevar::detail {

struct Eigenpair {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;
  int restarts = 0;
};

/// Smallest eigenpair of a real symmetric sparse matrix by restarted Lanczos
/// with full reorthogonalization. Restarts from the current Ritz vector.
Eigenpair lowest_eigenpair(const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix,
                           Eigen::VectorXd start, double tol, int krylov_dim, int max_restarts);

}  // namespace latticevar::detail
