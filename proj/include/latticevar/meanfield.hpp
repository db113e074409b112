#pragma once

#include <complex>
#include <cstdint>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "latticevar/model.hpp"

namespace latticevar::mf {

using Complex = std::complex<double>;

enum class Phase { MI, DW, SF, SS };
std::string_view to_string(Phase phase);

/// Sublattice mean fields phi_m = <a_m>, rho_m = <n_m>.
struct MeanFields {
  Complex phi_o{0.0, 0.0};
  Complex phi_e{0.0, 0.0};
  double rho_o = 0.0;
  double rho_e = 0.0;
};

struct MFSolution {
  Eigen::VectorXcd psi_o;
  Eigen::VectorXcd psi_e;
  Complex phi_o{0.0, 0.0};
  Complex phi_e{0.0, 0.0};
  double rho_o = 0.0;
  double rho_e = 0.0;
  double e_pair = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct ScfOptions {
  int n_max = 20;
  double mixing = 0.5;
  double tol_energy = 1e-10;
  double tol_param = 1e-8;
  int max_iterations = 10000;
};

/// h = -(mu - 2V rho_other) n - eps/2 (a^2 + a^dag^2) + U/2 n(n-1)
///     - 2J (phi_other^* a + phi_other a^dag)   on levels 0..n_max.
Eigen::MatrixXcd local_hamiltonian(Complex phi_other, double rho_other, const ModelParams& params,
                                   int n_max);

/// Alternating self-consistent iteration from `init`. Never throws on
/// non-convergence; the flag reports it. The result is gauge fixed (phi_o real
/// and nonnegative at eps = 0, Re phi_o >= 0 otherwise) and swapped so that
/// rho_o >= rho_e.
MFSolution scf_solve(const ModelParams& params, const MeanFields& init,
                     const ScfOptions& options = {});

/// Educated starts (atomic, uniform, and three staggered amplitudes) plus `n_random`
/// seeded random starts; returns the converged solution of lowest energy.
/// Throws Error(no_convergence) if no start converges.
MFSolution multistart(const ModelParams& params, int n_random, std::uint64_t seed,
                      const ScfOptions& options = {});

/// Exact expectation of H per pair of sites in the product state.
double energy_per_pair(const MFSolution& solution, const ModelParams& params);

/// Same quantity via <h_o> + <h_e> built from the stored mean fields plus the
/// correction terms for fields that differ from the state's expectations.
double energy_per_pair_from_local(const MFSolution& solution, const ModelParams& params);

struct LocalMoments {
  Complex a{0.0, 0.0};
  Complex a2{0.0, 0.0};
  double n = 0.0;
  double n_nm1 = 0.0;  // <n(n-1)>
};
LocalMoments local_moments(const Eigen::VectorXcd& psi);

Phase classify(const MFSolution& solution, double tol_phi = 1e-4, double tol_rho = 1e-4);
Phase classify(Complex phi_o, Complex phi_e, double rho_o, double rho_e, double tol_phi = 1e-4,
               double tol_rho = 1e-4);

struct ChiPair {
  double chi_o = 0.0;
  double chi_e = 0.0;
};

/// Second-order susceptibilities of the atomic state (n_o, n_e). Note the
/// argument is V/U, not 2V/U. Throws Error(degenerate) on a vanishing
/// denominator.
ChiPair chi_pair(int n_o, int n_e, double mu_over_u, double v_over_u);

/// Insulator/superfluid boundary J_c = U / (2 sqrt(chi_o chi_e)) at eps = 0.
double critical_hopping(const ModelParams& params);

/// Eigenvalues (kappa_+, kappa_-) of the curvature of e(phi) at phi = 0 for
/// hopping j; kappa_- changes sign at critical_hopping.
std::pair<double, double> curvature_eigenvalues(const ModelParams& params, double j);

}  // namespace latticevar::mf
