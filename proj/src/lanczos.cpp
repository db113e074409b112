#include "lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "latticevar/error.hpp"

namespace latticevar::detail {

Eigenpair lowest_eigenpair(const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix,
                           Eigen::VectorXd start, double tol, int krylov_dim, int max_restarts) {
  const Eigen::Index n = matrix.rows();
  const int m = static_cast<int>(std::min<Eigen::Index>(std::max(krylov_dim, 4), n));
  const int keep = std::max(1, m / 2);
  Eigenpair out;
  start.normalize();

  // Thick restart: the lowest `keep` Ritz vectors and the residual direction
  // seed the next cycle, so near-degenerate partners are not discarded.
  Eigen::MatrixXd q(n, m + 1);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  q.col(0) = start;
  int filled = 0;  // columns already carried over from the previous cycle
  for (int restart = 0; restart <= max_restarts; ++restart) {
    int size = m;
    bool invariant = false;
    for (int k = filled; k < m; ++k) {
      Eigen::VectorXd w = matrix * q.col(k);
      Eigen::VectorXd coeff = Eigen::VectorXd::Zero(k + 1);
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd c = q.leftCols(k + 1).transpose() * w;
        w.noalias() -= q.leftCols(k + 1) * c;
        coeff += c;
      }
      for (int i = 0; i <= k; ++i) t(i, k) = t(k, i) = coeff(i);
      const double beta = w.norm();
      if (beta < 1e-13 * std::max(1.0, std::abs(coeff(k)))) {
        size = k + 1;
        invariant = true;
        break;
      }
      q.col(k + 1) = w / beta;
      if (k + 1 < m) t(k + 1, k) = t(k, k + 1) = beta;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t.topLeftCorner(size, size));
    const double theta = small.eigenvalues()(0);
    Eigen::VectorXd ritz = q.leftCols(size) * small.eigenvectors().col(0);
    ritz.normalize();
    const double residual = (matrix * ritz - theta * ritz).norm();

    out.value = theta;
    out.vector = ritz;
    out.residual = residual;
    out.restarts = restart;
    if (residual <= tol) return out;

    if (invariant || size < m) {
      // Exhausted subspace without convergence: continue from the Ritz vector.
      q.col(0) = ritz;
      t.setZero();
      filled = 0;
      continue;
    }
    const int kept = std::min(keep, size);
    const Eigen::MatrixXd y = small.eigenvectors().leftCols(kept);
    const Eigen::MatrixXd basis = q.leftCols(size) * y;
    const Eigen::VectorXd next = q.col(size);
    q.leftCols(kept) = basis;
    q.col(kept) = next;
    t.setZero();
    for (int i = 0; i < kept; ++i) t(i, i) = small.eigenvalues()(i);
    filled = kept;
  }
  char message[128];
  std::snprintf(message, sizeof message, "Lanczos did not reach residual %.3g (last %.3g)", tol,
                out.residual);
  throw Error(ErrorCode::no_convergence, message);
}

}  // namespace latticevar::detail
