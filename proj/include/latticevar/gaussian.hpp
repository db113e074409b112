#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "latticevar/coherent.hpp"
#include "latticevar/model.hpp"

namespace latticevar::gaussian {

using Complex = std::complex<double>;

/// Pure Gaussian state over L modes. Quadratures are ordered (x_1..x_L,
/// p_1..p_L) with a_j = (x_j + i p_j)/2 and [r_m, r_n] = 2i Omega_mn, so the
/// vacuum has V = I.
struct State {
  Eigen::VectorXd d;
  Eigen::MatrixXd v;
  int sites() const { return static_cast<int>(d.size() / 2); }
};

Eigen::MatrixXd omega(int sites);

State vacuum(int sites);
State from_coherent(const coherent::Field& field);

/// V = K^T D K with K the orthogonal symplectic image of a random unitary and
/// squeezings r_j uniform in [0, squeeze_bound]; d has i.i.d. normal entries
/// of standard deviation mean_scale.
State random_pure(int sites, double squeeze_bound, std::uint64_t seed, double mean_scale = 1.0);

/// max |(V Omega)^2 + I|
double purity_defect(const State& state);
/// V + i Omega positive semidefinite up to `tol`.
bool is_physical(const State& state, double tol = 1e-10);
void validate(const State& state);

/// Complex amplitudes alpha_j = <a_j>.
Eigen::VectorXcd amplitudes(const State& state);
/// N_jk = <da_j^dag da_k>, M_jk = <da_j da_k>.
Eigen::MatrixXcd normal_moments(const State& state);
Eigen::MatrixXcd anomalous_moments(const State& state);

/// Central moment <dr_{i1} ... dr_{iK}> of quadratures (zero-based indices),
/// K <= 8. Odd orders return exactly 0.
Complex central_moment(const State& state, std::span<const int> indices);

/// A linear form sum_m c_m r_m in the quadratures.
using LinearForm = Eigen::VectorXcd;
LinearForm annihilation(int sites, int j);
LinearForm creation(int sites, int j);

/// Ordered product expectation <L_1 ... L_K> including mean shifts, K <= 8.
Complex product_moment(const State& state, const std::vector<LinearForm>& forms);

/// Closed-form <H>.
double energy(const State& state, const ModelParams& params);
/// <H> assembled term by term from product_moment; slow, for cross-checks.
double energy_via_moments(const State& state, const ModelParams& params);

struct Gradients {
  Eigen::VectorXd d;  // dE/dd
  Eigen::MatrixXd v;  // symmetric; dE = sum_mn G_mn dV_mn for symmetric dV
};
Gradients gradients(const State& state, const ModelParams& params);

/// Newton iteration V <- (V + Omega V^{-1} Omega^T)/2 until the defect is
/// below `tol`. Throws Error(purity_projection) on failure.
void project_pure(State& state, double tol);

struct FlowOptions {
  double step = 0.05;  // in units of 1/U
  double velocity_tol = 1e-9;
  long max_steps = 200000;
  double purity_tol = 1e-8;
  // Stop when the energy falls by less than stall_tol (relative) over
  // stall_window accepted steps; 0 disables.
  long stall_window = 2000;
  double stall_tol = 1e-12;
  bool record = false;
};

struct RelaxResult {
  State state;
  double energy = 0.0;
  double velocity = 0.0;  // max-norm of (d', V') at the end
  long steps = 0;
  long rejected = 0;
  bool converged = false;
  bool stalled = false;
  double max_defect = 0.0;
  std::vector<double> energies;
  std::vector<double> defects;
};

/// Imaginary-time flow d' = -2 V dE/dd, V' = 4 Omega^T G Omega - 4 V G V with
/// RK4, step halving on energy increase and projection back onto pure states.
RelaxResult flow_relax(State state, const ModelParams& params, const FlowOptions& options = {});

/// Lowest flow result over the analytic coherent solutions and `n_starts`
/// random pure states (squeezing up to 1, mean scale 2 max(1, alpha_SF)).
RelaxResult multistart_ground(const ModelParams& params, int sites, int n_starts,
                              std::uint64_t seed, const FlowOptions& options = {});

struct PhiMoments {
  double m1 = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
};

/// Raw moments of phi = sum_l (n_{2l-1} - n_{2l}) from the cumulant
/// generating function of the state; O(L^3).
PhiMoments phi_moments(const State& state);
/// Same through explicit Wick sums over all number products; O(L^4), small L.
PhiMoments phi_moments_wick(const State& state);

/// (3 - <phi^4>/<phi^2>^2)/2. Throws Error(degenerate) if <phi^2> < 1e-12.
double binder_dw(const State& state);
double binder_from_moments(const PhiMoments& moments);

}  // namespace latticevar::gaussian
