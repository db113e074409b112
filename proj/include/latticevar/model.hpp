#pragma once

#include "latticevar/error.hpp"

namespace latticevar {

/// Couplings of the extended Bose-Hubbard chain with coherent pair injection:
///   H = sum_j [ -mu n_j + U/2 n_j(n_j-1) - eps/2 (a_j^2 + h.c.)
///               + V n_j n_{j+1} - J (a_j^+ a_{j+1} + h.c.) ]
struct ModelParams {
  double mu = 0.0;
  double u = 1.0;
  double v = 0.0;
  double j = 0.0;
  double eps = 0.0;
};

/// Builds parameters from the dimensionless axes used throughout the tools
/// (mu/U, 2J/U, 2V/U, eps/U) with U = 1.
ModelParams from_ratios(double mu_over_u, double two_j_over_u, double two_v_over_u,
                        double eps_over_u);

/// Periodic chain with a per-site Fock cutoff n_max.
struct LatticeSpec {
  int sites = 4;
  int n_max = 3;
};

struct AtomicGroundState {
  int n_odd = 0;
  int n_even = 0;
  double energy_per_pair = 0.0;
};

/// Throws Error(invalid_argument) naming the first violated invariant.
void validate(const ModelParams& params);
void validate(const LatticeSpec& lattice);
void validate(const ModelParams& params, const LatticeSpec& lattice);

/// Checks only what every solver needs (finite couplings, u > 0); negative mu
/// is allowed for diagnostic runs.
void require_solvable(const ModelParams& params);

/// Zero-hopping, zero-injection ground state. Throws Error(degenerate) on the
/// 2V = U line. At integer mu/U (2V > U) or integer mu/(U+2V) (2V < U) the
/// ceiling is taken literally although neighbouring fillings are degenerate.
AtomicGroundState atomic_ground_occupations(const ModelParams& params);

/// -mu(n_o+n_e) + 2V n_o n_e + U/2 [n_o(n_o-1) + n_e(n_e-1)]
double atomic_energy_per_pair(int n_o, int n_e, const ModelParams& params);

}  // namespace latticevar
