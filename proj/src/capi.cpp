#include "latticevar/latticevar.h"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "latticevar/analysis.hpp"
#include "latticevar/coherent.hpp"
#include "latticevar/ed.hpp"
#include "latticevar/error.hpp"
#include "latticevar/gaussian.hpp"
#include "latticevar/meanfield.hpp"
#include "latticevar/model.hpp"

struct lv_model {
  latticevar::ModelParams params;
  latticevar::LatticeSpec lattice;
};

namespace {

using namespace latticevar;

thread_local std::string g_last_error;

lv_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return LV_ERR_INVALID_ARGUMENT;
    case ErrorCode::degenerate: return LV_ERR_DEGENERATE;
    case ErrorCode::no_convergence: return LV_ERR_NO_CONVERGENCE;
    case ErrorCode::dimension_overflow: return LV_ERR_DIMENSION_OVERFLOW;
    case ErrorCode::no_crossing: return LV_ERR_NO_CROSSING;
    case ErrorCode::step_collapse: return LV_ERR_STEP_COLLAPSE;
    case ErrorCode::purity_projection: return LV_ERR_PURITY_PROJECTION;
  }
  return LV_ERR_INTERNAL;
}

struct CallbackAbort {};

template <class F>
lv_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return LV_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const CallbackAbort&) {
    g_last_error = "classifier callback reported failure";
    return LV_ERR_CALLBACK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LV_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return LV_ERR_INTERNAL;
  }
}

void require(bool condition, const char* what) {
  if (!condition) throw Error(ErrorCode::invalid_argument, what);
}

lv_point_result blank() {
  lv_point_result r{};
  r.phase = LV_PHASE_NA;
  r.binder = std::numeric_limits<double>::quiet_NaN();
  return r;
}

int phase_code(mf::Phase p) {
  switch (p) {
    case mf::Phase::MI: return LV_PHASE_MI;
    case mf::Phase::DW: return LV_PHASE_DW;
    case mf::Phase::SF: return LV_PHASE_SF;
    case mf::Phase::SS: return LV_PHASE_SS;
  }
  return LV_PHASE_NA;
}

// Sublattice averages of per-site amplitudes and densities, gauge fixed and
// ordered so that rho_o >= rho_e.
void fill_sublattices(lv_point_result& r, const Eigen::VectorXcd& amp, const Eigen::VectorXd& dens,
                      double eps) {
  const auto l = amp.size();
  std::complex<double> po{0.0, 0.0}, pe{0.0, 0.0};
  double ro = 0.0, re = 0.0;
  for (Eigen::Index j = 0; j < l; ++j) {
    if (j % 2 == 0) {
      po += amp(j);
      ro += dens(j);
    } else {
      pe += amp(j);
      re += dens(j);
    }
  }
  const double half = static_cast<double>(l) / 2.0;
  po /= half;
  pe /= half;
  ro /= half;
  re /= half;
  if (re > ro) {
    std::swap(po, pe);
    std::swap(ro, re);
  }
  const std::complex<double> ref = std::abs(po) > 1e-14 ? po : pe;
  if (std::abs(ref) > 1e-14) {
    std::complex<double> rot{1.0, 0.0};
    if (eps == 0.0) {
      rot = std::conj(ref) / std::abs(ref);
    } else if (ref.real() < 0.0) {
      rot = -1.0;
    }
    po *= rot;
    pe *= rot;
  }
  r.phi_o_re = po.real();
  r.phi_o_im = po.imag();
  r.phi_e_re = pe.real();
  r.phi_e_im = pe.imag();
  r.rho_o = ro;
  r.rho_e = re;
  r.phase = phase_code(mf::classify(po, pe, ro, re));
}

analysis::Curve make_curve(const double* x, const double* y, size_t n) {
  require(x != nullptr && y != nullptr, "null curve pointer");
  return {std::vector<double>(x, x + n), std::vector<double>(y, y + n), 0};
}

}  // namespace

extern "C" {

const char* lv_last_error(void) { return g_last_error.c_str(); }

const char* lv_status_name(lv_status status) {
  switch (status) {
    case LV_OK: return "ok";
    case LV_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case LV_ERR_DEGENERATE: return "degenerate";
    case LV_ERR_NO_CONVERGENCE: return "no_convergence";
    case LV_ERR_DIMENSION_OVERFLOW: return "dimension_overflow";
    case LV_ERR_NO_CROSSING: return "no_crossing";
    case LV_ERR_STEP_COLLAPSE: return "step_collapse";
    case LV_ERR_PURITY_PROJECTION: return "purity_projection";
    case LV_ERR_CALLBACK: return "callback";
    case LV_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* lv_phase_name(int phase) {
  switch (phase) {
    case LV_PHASE_MI: return "MI";
    case LV_PHASE_DW: return "DW";
    case LV_PHASE_SF: return "SF";
    case LV_PHASE_SS: return "SS";
    default: return "NA";
  }
}

lv_status lv_model_create(double mu_over_u, double two_j_over_u, double two_v_over_u,
                          double eps_over_u, int sites, int n_max, lv_model** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = nullptr;
    const ModelParams p = from_ratios(mu_over_u, two_j_over_u, two_v_over_u, eps_over_u);
    require_solvable(p);
    if (p.j < 0.0 || p.v < 0.0 || p.eps < 0.0) {
      throw Error(ErrorCode::invalid_argument, "J, V and eps must be nonnegative");
    }
    const LatticeSpec lattice{sites, n_max};
    validate(lattice);
    *out = new lv_model{p, lattice};
  });
}

void lv_model_destroy(lv_model* model) { delete model; }

void lv_mf_options_default(lv_mf_options* o) {
  if (!o) return;
  const mf::ScfOptions d;
  *o = {d.n_max, d.mixing, d.tol_energy, d.tol_param, d.max_iterations, 8};
}

void lv_coherent_options_default(lv_coherent_options* o) {
  if (!o) return;
  const coherent::FlowOptions d;
  *o = {d.step, d.grad_tol, d.max_steps, 32};
}

void lv_gaussian_options_default(lv_gaussian_options* o) {
  if (!o) return;
  const gaussian::FlowOptions d;
  *o = {d.step, d.velocity_tol, d.max_steps, d.purity_tol, 16, 0};
}

void lv_ed_options_default(lv_ed_options* o) {
  if (!o) return;
  const ed::SolverOptions d;
  *o = {d.tol, static_cast<long>(d.dense_threshold), d.krylov_dim, d.max_restarts};
}

lv_status lv_solve_mf(const lv_model* model, const lv_mf_options* options, uint64_t seed,
                      lv_point_result* out) {
  return guarded([&] {
    require(model != nullptr && options != nullptr && out != nullptr, "null argument");
    *out = blank();
    mf::ScfOptions o;
    o.n_max = options->n_max;
    o.mixing = options->mixing;
    o.tol_energy = options->tol_energy;
    o.tol_param = options->tol_param;
    o.max_iterations = options->max_iterations;
    const mf::MFSolution s = mf::multistart(model->params, options->n_random, seed, o);
    out->energy = s.e_pair * model->lattice.sites / 2.0;
    out->phi_o_re = s.phi_o.real();
    out->phi_o_im = s.phi_o.imag();
    out->phi_e_re = s.phi_e.real();
    out->phi_e_im = s.phi_e.imag();
    out->rho_o = s.rho_o;
    out->rho_e = s.rho_e;
    out->phase = phase_code(mf::classify(s));
    out->converged = s.converged ? 1 : 0;
    out->iterations = s.iterations;
  });
}

lv_status lv_solve_coherent(const lv_model* model, const lv_coherent_options* options,
                            uint64_t seed, lv_point_result* out) {
  return guarded([&] {
    require(model != nullptr && options != nullptr && out != nullptr, "null argument");
    *out = blank();
    coherent::FlowOptions o;
    o.step = options->step;
    o.grad_tol = options->grad_tol;
    o.max_steps = options->max_steps;
    const auto r = coherent::multistart_ground(model->params, model->lattice.sites,
                                               options->n_starts, seed, o);
    out->energy = r.energy;
    fill_sublattices(*out, r.field, r.field.cwiseAbs2(), model->params.eps);
    out->converged = r.converged ? 1 : 0;
    out->iterations = r.steps;
    out->residual = r.residual;
  });
}

lv_status lv_solve_gaussian(const lv_model* model, const lv_gaussian_options* options,
                            uint64_t seed, lv_point_result* out) {
  return guarded([&] {
    require(model != nullptr && options != nullptr && out != nullptr, "null argument");
    *out = blank();
    gaussian::FlowOptions o;
    o.step = options->step;
    o.velocity_tol = options->velocity_tol;
    o.max_steps = options->max_steps;
    o.purity_tol = options->purity_tol;
    const auto r = gaussian::multistart_ground(model->params, model->lattice.sites,
                                               options->n_starts, seed, o);
    out->energy = r.energy;
    const Eigen::VectorXcd amp = gaussian::amplitudes(r.state);
    const Eigen::VectorXd dens = amp.cwiseAbs2() + gaussian::normal_moments(r.state).diagonal().real();
    fill_sublattices(*out, amp, dens, model->params.eps);
    out->converged = r.converged ? 1 : 0;
    out->iterations = r.steps;
    out->residual = r.velocity;
    out->purity_defect = gaussian::purity_defect(r.state);
    if (options->compute_binder) {
      const auto m = gaussian::phi_moments(r.state);
      if (m.m2 >= 1e-12) out->binder = gaussian::binder_from_moments(m);
    }
  });
}

lv_status lv_solve_ed(const lv_model* model, const lv_ed_options* options, lv_point_result* out) {
  return guarded([&] {
    require(model != nullptr && options != nullptr && out != nullptr, "null argument");
    require(options->dense_threshold >= 0, "dense threshold must be >= 0");
    *out = blank();
    ed::SolverOptions o;
    o.tol = options->tol;
    o.dense_threshold = static_cast<std::size_t>(options->dense_threshold);
    o.krylov_dim = options->krylov_dim;
    o.max_restarts = options->max_restarts;
    const ed::EDGroundState g = ed::solve(model->params, model->lattice, o);
    const ed::Observables obs = ed::observables(g);
    out->energy = g.energy;
    double ro = 0.0, re = 0.0;
    for (std::size_t j = 0; j < obs.density.size(); ++j) (j % 2 == 0 ? ro : re) += obs.density[j];
    ro /= model->lattice.sites / 2.0;
    re /= model->lattice.sites / 2.0;
    out->rho_o = std::max(ro, re);
    out->rho_e = std::min(ro, re);
    out->phase = LV_PHASE_NA;
    out->converged = 1;
    out->residual = g.residual;
    if (obs.phi2 >= 1e-12) out->binder = analysis::binder_from_moments(obs.phi2, obs.phi4);
  });
}

lv_status lv_atomic(const lv_model* model, int* n_odd, int* n_even, double* energy_per_pair) {
  return guarded([&] {
    require(model != nullptr && n_odd != nullptr && n_even != nullptr && energy_per_pair != nullptr,
            "null argument");
    const AtomicGroundState a = atomic_ground_occupations(model->params);
    *n_odd = a.n_odd;
    *n_even = a.n_even;
    *energy_per_pair = a.energy_per_pair;
  });
}

lv_status lv_critical_hopping(const lv_model* model, double* j_c_over_u) {
  return guarded([&] {
    require(model != nullptr && j_c_over_u != nullptr, "null argument");
    *j_c_over_u = mf::critical_hopping(model->params) / model->params.u;
  });
}

lv_status lv_ss_boundary_mu(const lv_model* model, double* mu_c_over_u, int* exists) {
  return guarded([&] {
    require(model != nullptr && mu_c_over_u != nullptr && exists != nullptr, "null argument");
    const auto mu = coherent::ss_boundary_mu(model->params);
    *exists = mu ? 1 : 0;
    *mu_c_over_u = mu ? *mu / model->params.u : std::numeric_limits<double>::quiet_NaN();
  });
}

lv_status lv_coherent_is_staggered(const lv_model* model, int* staggered) {
  return guarded([&] {
    require(model != nullptr && staggered != nullptr, "null argument");
    *staggered = coherent::analytic_is_staggered(model->params) ? 1 : 0;
  });
}

lv_status lv_makima(const double* x, const double* y, size_t n, double query, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = analysis::makima_interpolate(make_curve(x, y, n), query);
  });
}

lv_status lv_zero_threshold(const double* x, const double* y, size_t n, double zero_tol,
                            double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = analysis::critical_mu_zero_threshold(make_curve(x, y, n), zero_tol);
  });
}

lv_status lv_crossing(const double* x1, const double* y1, size_t n1, const double* x2,
                      const double* y2, size_t n2, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = analysis::crossing_point(make_curve(x1, y1, n1), make_curve(x2, y2, n2));
  });
}

lv_status lv_fss_fit(const double* sizes, const double* mu_c, size_t n, double* mu_inf,
                     double* beta, double* eta, double* rms_residual) {
  return guarded([&] {
    require(sizes != nullptr && mu_c != nullptr && mu_inf != nullptr && beta != nullptr &&
                eta != nullptr && rms_residual != nullptr,
            "null argument");
    std::vector<std::pair<double, double>> points;
    for (size_t i = 0; i < n; ++i) points.emplace_back(sizes[i], mu_c[i]);
    const analysis::FssFit f = analysis::fss_fit(points);
    *mu_inf = f.mu_inf;
    *beta = f.beta;
    *eta = f.eta;
    *rms_residual = f.rms_residual;
  });
}

lv_status lv_boundary_bisect(lv_classifier classifier, void* user, double lo, double hi,
                             double tol, double* out, int* iterations) {
  return guarded([&] {
    require(classifier != nullptr && out != nullptr, "null argument");
    const auto r = analysis::boundary_bisect(
        [&](double x) {
          const int label = classifier(x, user);
          if (label < 0) throw CallbackAbort{};
          return label;
        },
        lo, hi, tol);
    *out = r.value;
    if (iterations) *iterations = r.iterations;
  });
}

}  // extern "C"
