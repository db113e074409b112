#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "latticevar/model.hpp"

namespace latticevar::coherent {

/// Product of coherent states, one amplitude alpha_j per site.
using Field = Eigen::VectorXcd;

enum class Kind { trivial, uniform, staggered };

struct AnalyticSolution {
  Kind kind = Kind::trivial;
  double alpha = 0.0;  // amplitude on odd sites (site index 0, 2, ...)
  double r = 1.0;      // even/odd amplitude ratio
  double energy = 0.0;  // total over L sites
  double nu = 0.0;     // (mu + eps) / 2J, infinite at J = 0
  double a = 0.0;      // nu (2V/U - 1)
};

/// sum_j [ -mu|a_j|^2 - 2J Re(a_j a_{j+1}^*) - eps Re(a_j^2) + U/2 |a_j|^4
///         + V |a_j|^2 |a_{j+1}|^2 ]   periodic
double energy(const Field& field, const ModelParams& params);

/// Wirtinger derivative dE/d(alpha_j^*).
Field gradient(const Field& field, const ModelParams& params);

/// Trivial, uniform (if mu+eps+2J >= 0) and staggered (if a >= 2 and
/// 2V > U) stationary points, ascending in energy.
std::vector<AnalyticSolution> analytic_solutions(const ModelParams& params, int sites);

Field embed(const AnalyticSolution& solution, int sites);

/// mu_c = 4J / (2V/U - 1) - eps; empty when 2V <= U.
std::optional<double> ss_boundary_mu(const ModelParams& params);

/// True when the lowest analytic solution is staggered with r < 1.
bool analytic_is_staggered(const ModelParams& params);

struct FlowOptions {
  double step = 0.05;  // in units of 1/U
  double grad_tol = 1e-10;
  long max_steps = 1000000;
  bool record_energies = false;
};

struct RelaxResult {
  Field field;
  double energy = 0.0;
  double residual = 0.0;  // max-norm of the gradient
  long steps = 0;
  long rejected = 0;
  bool converged = false;
  std::vector<double> energies;  // accepted energies when recorded
};

/// RK4 integration of d(alpha)/dt = -dE/d(alpha^*) with step halving on energy
/// increase. Throws Error(step_collapse) if the step drops below 1e-14.
RelaxResult relax(Field field, const ModelParams& params, const FlowOptions& options = {});

/// Best attractor over the analytic solutions and `n_starts` random fields
/// (modulus uniform in [0, 2 max(1, alpha_SF)], uniform phase).
RelaxResult multistart_ground(const ModelParams& params, int sites, int n_starts,
                              std::uint64_t seed, const FlowOptions& options = {});

/// Two species per site coupled by -eps (a_j b_j + h.c.).
struct TwoModeField {
  Field alphas;
  Field betas;
};

double two_mode_energy(const TwoModeField& field, const ModelParams& params);
/// Wirtinger derivatives with respect to alpha^* and beta^*.
TwoModeField two_mode_gradient(const TwoModeField& field, const ModelParams& params);

struct TwoModeAnalytic {
  bool balanced = true;
  Kind kind = Kind::trivial;  // for unbalanced solutions always uniform
  double alpha = 0.0;         // signed real amplitudes
  double beta = 0.0;
  double r = 1.0;             // staggering ratio of balanced solutions
  double energy = 0.0;
};

/// Balanced solutions (alpha = beta, twice the single-mode energies) and, when
/// 2 eps <= mu + 2J, the homogeneous unbalanced pair with
/// (U+2V) alpha^2, (U+2V) beta^2 = ((mu+2J) +- sqrt((mu+2J)^2 - 4 eps^2)) / 2
/// and beta of opposite sign, energy -L[(mu+2J)^2/2 - eps^2]/(U+2V).
std::vector<TwoModeAnalytic> two_mode_analytic(const ModelParams& params, int sites);

TwoModeField embed(const TwoModeAnalytic& solution, int sites);

struct TwoModeRelaxResult {
  TwoModeField field;
  double energy = 0.0;
  double residual = 0.0;
  long steps = 0;
  long rejected = 0;
  bool converged = false;
  std::vector<double> energies;
};

TwoModeRelaxResult two_mode_relax(TwoModeField field, const ModelParams& params,
                                  const FlowOptions& options = {});

}  // namespace latticevar::coherent
