#include "latticevar/model.hpp"

#include <cmath>

namespace latticevar {

ModelParams from_ratios(double mu_over_u, double two_j_over_u, double two_v_over_u,
                        double eps_over_u) {
  ModelParams p;
  p.u = 1.0;
  p.mu = mu_over_u;
  p.j = 0.5 * two_j_over_u;
  p.v = 0.5 * two_v_over_u;
  p.eps = eps_over_u;
  return p;
}

namespace {

void fail(const char* what) { throw Error(ErrorCode::invalid_argument, what); }

}  // namespace

void require_solvable(const ModelParams& p) {
  if (!std::isfinite(p.mu) || !std::isfinite(p.u) || !std::isfinite(p.v) || !std::isfinite(p.j) ||
      !std::isfinite(p.eps))
    fail("parameters must be finite");
  if (!(p.u > 0.0)) fail("u must be positive");
}

void validate(const ModelParams& p) {
  require_solvable(p);
  if (p.mu < 0.0) fail("mu must be nonnegative");
  if (p.v < 0.0) fail("v must be nonnegative");
  if (p.j < 0.0) fail("j must be nonnegative");
  if (p.eps < 0.0) fail("eps must be nonnegative");
}

void validate(const LatticeSpec& lattice) {
  if (lattice.sites < 4 || lattice.sites % 2 != 0) fail("L must be even and >= 4");
  if (lattice.n_max < 1) fail("n_max must be >= 1");
}

void validate(const ModelParams& params, const LatticeSpec& lattice) {
  validate(params);
  validate(lattice);
}

AtomicGroundState atomic_ground_occupations(const ModelParams& p) {
  require_solvable(p);
  const double two_v = 2.0 * p.v;
  if (two_v == p.u)
    throw Error(ErrorCode::degenerate,
                "2V = U: many Fock configurations are degenerate in the atomic limit");

  AtomicGroundState gs;
  if (two_v > p.u) {
    gs.n_odd = static_cast<int>(std::ceil(p.mu / p.u));
    gs.n_even = 0;
  } else {
    gs.n_odd = static_cast<int>(std::ceil(p.mu / (p.u + two_v)));
    gs.n_even = static_cast<int>(std::ceil((p.mu - two_v) / (p.u + two_v)));
  }
  // Negative chemical potentials (diagnostic mode) empty the lattice.
  if (gs.n_odd < 0) gs.n_odd = 0;
  if (gs.n_even < 0) gs.n_even = 0;
  gs.energy_per_pair = atomic_energy_per_pair(gs.n_odd, gs.n_even, p);
  return gs;
}

double atomic_energy_per_pair(int n_o, int n_e, const ModelParams& p) {
  if (n_o < 0 || n_e < 0) throw Error(ErrorCode::invalid_argument, "occupations must be >= 0");
  const double no = n_o, ne = n_e;
  return -p.mu * (no + ne) + 2.0 * p.v * no * ne +
         0.5 * p.u * (no * (no - 1.0) + ne * (ne - 1.0));
}

}  // namespace latticevar
