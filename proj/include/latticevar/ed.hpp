#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "latticevar/model.hpp"

namespace latticevar::ed {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr std::size_t kDefaultDimensionCap = std::size_t{1} << 20;

/// Truncated Fock basis of a periodic chain. Index encoding is mixed radix
/// with site 0 as the least significant digit: index = sum_j n_j (n_max+1)^j.
class FockBasis {
 public:
  explicit FockBasis(const LatticeSpec& lattice, std::size_t cap = kDefaultDimensionCap);

  const LatticeSpec& lattice() const { return lattice_; }
  std::size_t dimension() const { return dimension_; }
  int sites() const { return lattice_.sites; }
  int n_max() const { return lattice_.n_max; }

  int occupation(std::size_t index, int site) const {
    return static_cast<int>((index / strides_[site]) % radix_);
  }
  std::vector<int> occupations(std::size_t index) const;
  std::size_t index(const std::vector<int>& occupations) const;
  std::size_t stride(int site) const { return strides_[site]; }
  int total_particles(std::size_t index) const;
  /// Eigenvalue of (-1)^N on a basis state.
  int parity(std::size_t index) const { return total_particles(index) % 2 == 0 ? 1 : -1; }

 private:
  LatticeSpec lattice_;
  std::size_t radix_ = 0;
  std::size_t dimension_ = 0;
  std::vector<std::size_t> strides_;
};

/// All five terms of the Hamiltonian in the Fock basis, periodic bonds.
/// Throws Error(dimension_overflow) if (n_max+1)^L exceeds the cap.
SparseMatrix build_hamiltonian(const ModelParams& params, const FockBasis& basis);

struct SolverOptions {
  double tol = 1e-9;                  // residual bound ||H psi - E psi||
  std::size_t dense_threshold = 512;   // sector dimension below which a dense solve is used
  int krylov_dim = 48;
  int max_restarts = 400;
};

struct EDGroundState {
  double energy = 0.0;
  Eigen::VectorXd coefficients;  // real: the Hamiltonian is real symmetric
  int parity = 1;
  bool degenerate = false;  // parity sectors tie within 1e-12
  double residual = 0.0;
  LatticeSpec lattice;
};

/// Lowest eigenpair, resolved per parity sector. The lower sector wins; on a
/// tie the even sector is reported and flagged. Deterministic.
EDGroundState ground_state(const SparseMatrix& hamiltonian, const FockBasis& basis,
                           const SolverOptions& options = {});

EDGroundState solve(const ModelParams& params, const LatticeSpec& lattice,
                    const SolverOptions& options = {});

/// Raises n_max in steps of `step` from `lattice.n_max` until the ground energy
/// changes by less than `energy_tol`. Returns the last state.
EDGroundState solve_converged(const ModelParams& params, LatticeSpec lattice, double energy_tol,
                              int step = 2, int n_max_limit = 40,
                              const SolverOptions& options = {});

struct Observables {
  std::vector<double> density;       // <n_j>
  std::vector<double> amplitude;     // <a_j>, zero on parity eigenstates
  std::vector<double> pair;          // <a_j^2>
  std::vector<double> c_sf;          // index d = 0..L/2, averaged over the reference site
  std::vector<double> c_dw;          // index d = 0..L/2, fluctuations about the mean density
  double phi2 = 0.0;                 // <phi^2>, phi = sum_l (n_{2l-1} - n_{2l})
  double phi4 = 0.0;
};

Observables observables(const EDGroundState& state);

}  // namespace latticevar::ed
