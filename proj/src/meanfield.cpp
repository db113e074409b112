#include "latticevar/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "latticevar/error.hpp"

namespace latticevar::mf {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::MI: return "MI";
    case Phase::DW: return "DW";
    case Phase::SF: return "SF";
    case Phase::SS: return "SS";
  }
  return "?";
}

Eigen::MatrixXcd local_hamiltonian(Complex phi_other, double rho_other, const ModelParams& params,
                                   int n_max) {
  if (n_max < 1) throw Error(ErrorCode::invalid_argument, "n_max must be >= 1");
  const int d = n_max + 1;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  const double mu_eff = params.mu - 2.0 * params.v * rho_other;
  for (int n = 0; n < d; ++n) {
    h(n, n) = -mu_eff * n + 0.5 * params.u * n * (n - 1.0);
    if (n + 1 < d) {
      // <n+1| a^dag |n> = sqrt(n+1)
      const double s = std::sqrt(n + 1.0);
      h(n + 1, n) += -2.0 * params.j * phi_other * s;
      h(n, n + 1) += -2.0 * params.j * std::conj(phi_other) * s;
    }
    if (n + 2 < d) {
      const double s = std::sqrt((n + 1.0) * (n + 2.0));
      h(n + 2, n) += -0.5 * params.eps * s;
      h(n, n + 2) += -0.5 * params.eps * s;
    }
  }
  return h;
}

LocalMoments local_moments(const Eigen::VectorXcd& psi) {
  LocalMoments m;
  const auto d = psi.size();
  for (Eigen::Index n = 0; n < d; ++n) {
    const double p = std::norm(psi(n));
    m.n += p * static_cast<double>(n);
    m.n_nm1 += p * static_cast<double>(n) * static_cast<double>(n - 1);
    if (n >= 1) m.a += std::conj(psi(n - 1)) * psi(n) * std::sqrt(static_cast<double>(n));
    if (n >= 2) {
      m.a2 += std::conj(psi(n - 2)) * psi(n) *
              std::sqrt(static_cast<double>(n) * static_cast<double>(n - 1));
    }
  }
  return m;
}

namespace {

Eigen::VectorXcd lowest_state(const Eigen::MatrixXcd& h) {
  Eigen::VectorXcd v;
  if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.real());
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::no_convergence, "local eigensolver failed");
    }
    v = solver.eigenvectors().col(0).cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::no_convergence, "local eigensolver failed");
    }
    v = solver.eigenvectors().col(0);
  }
  Eigen::Index arg = 0;
  v.cwiseAbs2().maxCoeff(&arg);
  v *= std::abs(v(arg)) / v(arg);
  return v;
}

double exact_energy(const LocalMoments& o, const LocalMoments& e, const ModelParams& p) {
  return -p.mu * (o.n + e.n) + 0.5 * p.u * (o.n_nm1 + e.n_nm1) -
         p.eps * (o.a2.real() + e.a2.real()) - 4.0 * p.j * (std::conj(o.a) * e.a).real() +
         2.0 * p.v * o.n * e.n;
}

void apply_phase(Eigen::VectorXcd& psi, Complex step) {
  Complex f{1.0, 0.0};
  for (Eigen::Index n = 0; n < psi.size(); ++n) {
    psi(n) *= f;
    f *= step;
  }
}

void normalize_phase(Eigen::VectorXcd& psi) {
  Eigen::Index arg = 0;
  psi.cwiseAbs2().maxCoeff(&arg);
  if (std::abs(psi(arg)) > 0.0) psi *= std::abs(psi(arg)) / psi(arg);
}

void finalize(MFSolution& s, const ModelParams& params) {
  LocalMoments o = local_moments(s.psi_o);
  LocalMoments e = local_moments(s.psi_e);
  if (e.n > o.n) {
    std::swap(s.psi_o, s.psi_e);
    std::swap(o, e);
  }
  const Complex ref = std::abs(o.a) > 1e-14 ? o.a : e.a;
  if (std::abs(ref) > 1e-14) {
    if (params.eps == 0.0) {
      const Complex step = std::conj(ref) / std::abs(ref);  // e^{-i theta}
      apply_phase(s.psi_o, step);
      apply_phase(s.psi_e, step);
    } else if (ref.real() < 0.0) {
      apply_phase(s.psi_o, Complex{-1.0, 0.0});
      apply_phase(s.psi_e, Complex{-1.0, 0.0});
    }
  }
  normalize_phase(s.psi_o);
  normalize_phase(s.psi_e);
  o = local_moments(s.psi_o);
  e = local_moments(s.psi_e);
  s.phi_o = o.a;
  s.phi_e = e.a;
  s.rho_o = o.n;
  s.rho_e = e.n;
  s.e_pair = exact_energy(o, e, params);
}

}  // namespace

namespace {

using Packed = Eigen::Matrix<double, 6, 1>;

Packed pack(const MeanFields& f) {
  Packed x;
  x << f.phi_o.real(), f.phi_o.imag(), f.rho_o, f.phi_e.real(), f.phi_e.imag(), f.rho_e;
  return x;
}

MeanFields unpack(const Packed& x) {
  return {{x(0), x(1)}, {x(3), x(4)}, x(2), x(5)};
}

constexpr int kAndersonDepth = 5;

}  // namespace

// Damped alternating sweeps, accelerated by Anderson extrapolation over the
// last few sweeps. The extrapolation only changes the path, not the fixed
// point; the history is dropped whenever the damping is reduced.
MFSolution scf_solve(const ModelParams& params, const MeanFields& init, const ScfOptions& options) {
  require_solvable(params);
  if (!(options.mixing > 0.0 && options.mixing <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "mixing must lie in (0, 1]");
  }
  if (options.max_iterations < 1) {
    throw Error(ErrorCode::invalid_argument, "iteration cap must be positive");
  }
  Packed x = pack(init);
  double lambda = options.mixing;
  double previous_energy = std::numeric_limits<double>::quiet_NaN();
  double previous_residual = std::numeric_limits<double>::infinity();
  int rises = 0;
  std::vector<Packed> d_f, d_g;
  Packed f_prev, g_prev;
  bool have_prev = false;

  MFSolution s;
  for (int it = 1; it <= options.max_iterations; ++it) {
    MeanFields f = unpack(x);
    s.psi_o = lowest_state(local_hamiltonian(f.phi_e, f.rho_e, params, options.n_max));
    const LocalMoments o = local_moments(s.psi_o);
    const Complex dphi_o = o.a - f.phi_o;
    const double drho_o = o.n - f.rho_o;
    f.phi_o += lambda * dphi_o;
    f.rho_o += lambda * drho_o;

    s.psi_e = lowest_state(local_hamiltonian(f.phi_o, f.rho_o, params, options.n_max));
    const LocalMoments e = local_moments(s.psi_e);
    const Complex dphi_e = e.a - f.phi_e;
    const double drho_e = e.n - f.rho_e;
    f.phi_e += lambda * dphi_e;
    f.rho_e += lambda * drho_e;

    const double energy = exact_energy(o, e, params);
    const double residual = std::max({std::abs(dphi_o), std::abs(dphi_e), std::abs(drho_o),
                                      std::abs(drho_e)});
    s.iterations = it;
    if (it > 1 && std::abs(energy - previous_energy) < options.tol_energy &&
        residual < options.tol_param) {
      s.converged = true;
      break;
    }
    bool reset = false;
    if (residual > previous_residual) {
      if (++rises >= 3 && lambda > 1.0 / 64.0) {
        lambda *= 0.5;
        rises = 0;
        reset = true;
      }
    } else {
      rises = 0;
    }
    previous_residual = residual;
    previous_energy = energy;

    const Packed g = pack(f);
    const Packed fx = g - x;
    if (reset) {
      d_f.clear();
      d_g.clear();
      have_prev = false;
    }
    if (have_prev) {
      d_f.push_back(fx - f_prev);
      d_g.push_back(g - g_prev);
      if (static_cast<int>(d_f.size()) > kAndersonDepth) {
        d_f.erase(d_f.begin());
        d_g.erase(d_g.begin());
      }
    }
    f_prev = fx;
    g_prev = g;
    have_prev = true;

    Packed next = g;
    if (!d_f.empty()) {
      const auto k = static_cast<Eigen::Index>(d_f.size());
      Eigen::MatrixXd df(6, k), dg(6, k);
      for (Eigen::Index c = 0; c < k; ++c) {
        df.col(c) = d_f[c];
        dg.col(c) = d_g[c];
      }
      const Eigen::VectorXd gamma = df.colPivHouseholderQr().solve(fx);
      const Packed candidate = g - dg * gamma;
      if (candidate.allFinite() && candidate(2) >= 0.0 && candidate(5) >= 0.0) {
        next = candidate;
      } else {
        d_f.clear();
        d_g.clear();
      }
    }
    x = next;
  }
  finalize(s, params);
  return s;
}

MFSolution multistart(const ModelParams& params, int n_random, std::uint64_t seed,
                      const ScfOptions& options) {
  require_solvable(params);
  if (n_random < 0) throw Error(ErrorCode::invalid_argument, "n_random must be >= 0");

  std::vector<MeanFields> starts;
  {
    MeanFields atomic;
    try {
      const AtomicGroundState a = atomic_ground_occupations(params);
      atomic.rho_o = a.n_odd;
      atomic.rho_e = a.n_even;
    } catch (const Error&) {
      atomic.rho_o = std::max(0.0, std::ceil(params.mu / params.u));
    }
    starts.push_back(atomic);
  }
  {
    const double amp2 = (params.mu + params.eps + 2.0 * params.j) / (params.u + 2.0 * params.v);
    const double amp = amp2 > 0.0 ? std::sqrt(amp2) : 0.5;
    MeanFields uniform;
    uniform.phi_o = uniform.phi_e = amp;
    uniform.rho_o = uniform.rho_e = amp * amp;
    starts.push_back(uniform);

    MeanFields staggered;
    staggered.phi_o = std::sqrt(2.0) * amp + 0.2;
    staggered.phi_e = 0.3 * amp;
    staggered.rho_o = std::norm(staggered.phi_o);
    staggered.rho_e = std::norm(staggered.phi_e);
    starts.push_back(staggered);

    // Weakly and strongly staggered densities around the uniform amplitude.
    for (const double tilt : {0.3, 0.7}) {
      MeanFields m;
      m.phi_o = amp * std::sqrt(1.0 + tilt);
      m.phi_e = amp * std::sqrt(1.0 - tilt);
      m.rho_o = amp * amp * (1.0 + tilt);
      m.rho_e = amp * amp * (1.0 - tilt);
      starts.push_back(m);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double scale = std::max(1.0, std::sqrt(std::max(params.mu, 0.0) / params.u + 1.0));
  for (int r = 0; r < n_random; ++r) {
    MeanFields m;
    m.phi_o = std::polar(2.0 * scale * unit(rng), 2.0 * std::numbers::pi * unit(rng));
    m.phi_e = std::polar(2.0 * scale * unit(rng), 2.0 * std::numbers::pi * unit(rng));
    m.rho_o = 2.0 * scale * scale * unit(rng);
    m.rho_e = 2.0 * scale * scale * unit(rng);
    starts.push_back(m);
  }

  MFSolution best;
  bool found = false;
  for (const MeanFields& start : starts) {
    MFSolution s = scf_solve(params, start, options);
    if (!s.converged) continue;
    if (!found || s.e_pair < best.e_pair - 1e-13) {
      best = std::move(s);
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::no_convergence, "no mean-field start converged");
  return best;
}

double energy_per_pair(const MFSolution& solution, const ModelParams& params) {
  return exact_energy(local_moments(solution.psi_o), local_moments(solution.psi_e), params);
}

double energy_per_pair_from_local(const MFSolution& solution, const ModelParams& params) {
  const int n_max = static_cast<int>(solution.psi_o.size()) - 1;
  const Eigen::MatrixXcd h_o = local_hamiltonian(solution.phi_e, solution.rho_e, params, n_max);
  const Eigen::MatrixXcd h_e = local_hamiltonian(solution.phi_o, solution.rho_o, params, n_max);
  const double eo = solution.psi_o.dot(h_o * solution.psi_o).real();
  const double ee = solution.psi_e.dot(h_e * solution.psi_e).real();
  const LocalMoments o = local_moments(solution.psi_o);
  const LocalMoments e = local_moments(solution.psi_e);
  const Complex phi_o = solution.phi_o;
  const Complex phi_e = solution.phi_e;
  const double e_mf = eo + ee - 2.0 * params.v * solution.rho_o * solution.rho_e +
                      4.0 * params.j * (std::conj(phi_o) * phi_e).real();
  return e_mf + 2.0 * params.v * (o.n - solution.rho_o) * (e.n - solution.rho_e) -
         4.0 * params.j * (std::conj(o.a - phi_o) * (e.a - phi_e)).real();
}

Phase classify(Complex phi_o, Complex phi_e, double rho_o, double rho_e, double tol_phi,
               double tol_rho) {
  const bool coherent = std::max(std::abs(phi_o), std::abs(phi_e)) > tol_phi;
  const bool staggered = std::abs(rho_o - rho_e) > tol_rho;
  if (!coherent) return staggered ? Phase::DW : Phase::MI;
  return staggered ? Phase::SS : Phase::SF;
}

Phase classify(const MFSolution& solution, double tol_phi, double tol_rho) {
  return classify(solution.phi_o, solution.phi_e, solution.rho_o, solution.rho_e, tol_phi,
                  tol_rho);
}

ChiPair chi_pair(int n_o, int n_e, double mu_over_u, double v_over_u) {
  if (n_o < 0 || n_e < 0) throw Error(ErrorCode::invalid_argument, "occupations must be >= 0");
  const auto chi = [&](int n, int other) {
    const double shift = mu_over_u - 2.0 * other * v_over_u;
    const double remove = shift + 1.0 - n;
    const double add = n - shift;
    if (remove == 0.0 || add == 0.0) {
      throw Error(ErrorCode::degenerate, "susceptibility denominator vanishes (lobe corner)");
    }
    return n / remove + (n + 1.0) / add;
  };
  return {chi(n_o, n_e), chi(n_e, n_o)};
}

double critical_hopping(const ModelParams& params) {
  require_solvable(params);
  if (params.eps != 0.0) {
    throw Error(ErrorCode::invalid_argument, "analytic boundary requires eps = 0");
  }
  const AtomicGroundState a = atomic_ground_occupations(params);
  const ChiPair c = chi_pair(a.n_odd, a.n_even, params.mu / params.u, params.v / params.u);
  if (!(c.chi_o > 0.0 && c.chi_e > 0.0)) {
    throw Error(ErrorCode::degenerate, "nonpositive susceptibility outside the lobe");
  }
  return params.u / (2.0 * std::sqrt(c.chi_o * c.chi_e));
}

std::pair<double, double> curvature_eigenvalues(const ModelParams& params, double j) {
  require_solvable(params);
  const AtomicGroundState a = atomic_ground_occupations(params);
  const ChiPair c = chi_pair(a.n_odd, a.n_even, params.mu / params.u, params.v / params.u);
  const double u = params.u;
  const double root = std::sqrt((c.chi_e - c.chi_o) * (c.chi_e - c.chi_o) +
                                16.0 * j * j * c.chi_o * c.chi_o * c.chi_e * c.chi_e / (u * u));
  const double pre = 2.0 * j * j / u;
  return {pre * (c.chi_e + c.chi_o + root), pre * (c.chi_e + c.chi_o - root)};
}

}  // namespace latticevar::mf
