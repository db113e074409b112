#include "latticevar/coherent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "latticevar/error.hpp"

namespace latticevar::coherent {

namespace {

using Complex = std::complex<double>;

void check_field(const Field& field) {
  if (field.size() < 4 || field.size() % 2 != 0) {
    throw Error(ErrorCode::invalid_argument, "L must be even and >= 4");
  }
  if (!field.allFinite()) throw Error(ErrorCode::invalid_argument, "field must be finite");
}

struct FlowTrace {
  Field state;
  double energy = 0.0;
  double residual = 0.0;
  long steps = 0;
  long rejected = 0;
  bool converged = false;
  std::vector<double> energies;
};

template <class EnergyFn, class GradFn>
FlowTrace integrate(Field state, double u, const FlowOptions& options, EnergyFn energy_of,
                    GradFn grad_of) {
  if (!(options.step > 0.0) || !(options.grad_tol > 0.0) || options.max_steps < 0) {
    throw Error(ErrorCode::invalid_argument, "flow options must be positive");
  }
  const double base = options.step / u;
  double h = base;
  FlowTrace out;
  out.energy = energy_of(state);
  Field g = grad_of(state);
  out.residual = g.cwiseAbs().maxCoeff();
  if (options.record_energies) out.energies.push_back(out.energy);

  while (out.residual >= options.grad_tol && out.steps < options.max_steps) {
    const Field k1 = -g;
    const Field k2 = -grad_of(state + 0.5 * h * k1);
    const Field k3 = -grad_of(state + 0.5 * h * k2);
    const Field k4 = -grad_of(state + h * k3);
    Field next = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double e_next = energy_of(next);
    if (!(e_next <= out.energy + 1e-13 * std::abs(out.energy))) {
      ++out.rejected;
      h *= 0.5;
      if (h < 1e-14) {
        throw Error(ErrorCode::step_collapse, "flow step collapsed below 1e-14");
      }
      continue;
    }
    state = std::move(next);
    out.energy = e_next;
    g = grad_of(state);
    out.residual = g.cwiseAbs().maxCoeff();
    ++out.steps;
    if (options.record_energies) out.energies.push_back(out.energy);
    h = std::min(base, 2.0 * h);
  }
  out.converged = out.residual < options.grad_tol;
  out.state = std::move(state);
  return out;
}

Field flatten(const TwoModeField& f) {
  Field out(f.alphas.size() + f.betas.size());
  out << f.alphas, f.betas;
  return out;
}

TwoModeField split(const Field& f) {
  const auto l = f.size() / 2;
  return {f.head(l), f.tail(l)};
}

}  // namespace

double energy(const Field& field, const ModelParams& p) {
  check_field(field);
  const auto l = field.size();
  double e = 0.0;
  for (Eigen::Index j = 0; j < l; ++j) {
    const Complex a = field(j);
    const Complex b = field((j + 1) % l);
    const double n = std::norm(a);
    e += -p.mu * n - 2.0 * p.j * (a * std::conj(b)).real() - p.eps * (a * a).real() +
         0.5 * p.u * n * n + p.v * n * std::norm(b);
  }
  return e;
}

Field gradient(const Field& field, const ModelParams& p) {
  check_field(field);
  const auto l = field.size();
  Field g(l);
  for (Eigen::Index j = 0; j < l; ++j) {
    const Complex a = field(j);
    const Complex right = field((j + 1) % l);
    const Complex left = field((j + l - 1) % l);
    g(j) = (-p.mu + p.u * std::norm(a) + p.v * (std::norm(right) + std::norm(left))) * a -
           p.j * (right + left) - p.eps * std::conj(a);
  }
  return g;
}

std::vector<AnalyticSolution> analytic_solutions(const ModelParams& p, int sites) {
  require_solvable(p);
  validate(LatticeSpec{sites, 1});
  const double drive = p.mu + p.eps;
  const double w = 2.0 * p.v / p.u - 1.0;
  double nu = 0.0;
  if (p.j > 0.0) {
    nu = drive / (2.0 * p.j);
  } else if (drive != 0.0) {
    nu = std::copysign(std::numeric_limits<double>::infinity(), drive);
  }
  const double a = (w == 0.0 || nu == 0.0) ? 0.0 : nu * w;
  const double l = sites;

  std::vector<AnalyticSolution> out;
  out.push_back({Kind::trivial, 0.0, 1.0, 0.0, nu, a});
  const double m = drive + 2.0 * p.j;
  if (m >= 0.0) {
    const double alpha2 = m / (p.u + 2.0 * p.v);
    out.push_back({Kind::uniform, std::sqrt(alpha2), 1.0, -l * m * m / (2.0 * (p.u + 2.0 * p.v)),
                   nu, a});
  }
  if (w > 0.0 && a >= 2.0) {
    const double r = std::isinf(a) ? 0.0 : 2.0 / (a + std::sqrt(a * a - 4.0));
    const double alpha2 = (drive + 2.0 * r * p.j) / (p.u + 2.0 * r * r * p.v);
    const double e = -(l / p.u) * (0.25 * drive * drive + 2.0 * p.j * p.j / w);
    out.push_back({Kind::staggered, std::sqrt(alpha2), r, e, nu, a});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AnalyticSolution& x, const AnalyticSolution& y) {
                     return x.energy < y.energy;
                   });
  return out;
}

Field embed(const AnalyticSolution& s, int sites) {
  validate(LatticeSpec{sites, 1});
  Field f(sites);
  for (int j = 0; j < sites; ++j) f(j) = (j % 2 == 0) ? s.alpha : s.r * s.alpha;
  return f;
}

std::optional<double> ss_boundary_mu(const ModelParams& p) {
  require_solvable(p);
  const double w = 2.0 * p.v / p.u - 1.0;
  if (!(w > 0.0)) return std::nullopt;
  return 4.0 * p.j / w - p.eps;
}

bool analytic_is_staggered(const ModelParams& p) {
  require_solvable(p);
  const double w = 2.0 * p.v / p.u - 1.0;
  return w > 0.0 && (p.mu + p.eps) * w > 4.0 * p.j;
}

RelaxResult relax(Field field, const ModelParams& params, const FlowOptions& options) {
  require_solvable(params);
  check_field(field);
  FlowTrace t = integrate(
      std::move(field), params.u, options, [&](const Field& f) { return energy(f, params); },
      [&](const Field& f) { return gradient(f, params); });
  RelaxResult r;
  r.field = std::move(t.state);
  r.energy = t.energy;
  r.residual = t.residual;
  r.steps = t.steps;
  r.rejected = t.rejected;
  r.converged = t.converged;
  r.energies = std::move(t.energies);
  return r;
}

RelaxResult multistart_ground(const ModelParams& params, int sites, int n_starts,
                              std::uint64_t seed, const FlowOptions& options) {
  if (n_starts < 0) throw Error(ErrorCode::invalid_argument, "n_starts must be >= 0");
  const auto analytic = analytic_solutions(params, sites);
  std::vector<Field> starts;
  for (const auto& s : analytic) starts.push_back(embed(s, sites));

  const double m = params.mu + params.eps + 2.0 * params.j;
  const double alpha_sf = m > 0.0 ? std::sqrt(m / (params.u + 2.0 * params.v)) : 0.0;
  const double bound = 2.0 * std::max(1.0, alpha_sf);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < n_starts; ++s) {
    Field f(sites);
    for (int j = 0; j < sites; ++j) {
      const double mod = bound * unit(rng);
      f(j) = std::polar(mod, 2.0 * std::numbers::pi * unit(rng));
    }
    starts.push_back(std::move(f));
  }

  RelaxResult best;
  bool found = false;
  for (Field& start : starts) {
    RelaxResult r = relax(std::move(start), params, options);
    if (!found || r.energy < best.energy) {
      best = std::move(r);
      found = true;
    }
  }
  return best;
}

double two_mode_energy(const TwoModeField& field, const ModelParams& p) {
  check_field(field.alphas);
  check_field(field.betas);
  if (field.alphas.size() != field.betas.size()) {
    throw Error(ErrorCode::invalid_argument, "species must have equal length");
  }
  const auto l = field.alphas.size();
  double e = 0.0;
  for (Eigen::Index j = 0; j < l; ++j) {
    const Complex a = field.alphas(j);
    const Complex b = field.betas(j);
    const Complex a1 = field.alphas((j + 1) % l);
    const Complex b1 = field.betas((j + 1) % l);
    const double na = std::norm(a);
    const double nb = std::norm(b);
    e += -p.mu * (na + nb) - 2.0 * p.j * (a * std::conj(a1) + b * std::conj(b1)).real() -
         2.0 * p.eps * (a * b).real() + 0.5 * p.u * (na * na + nb * nb) +
         p.v * (na * std::norm(a1) + nb * std::norm(b1));
  }
  return e;
}

TwoModeField two_mode_gradient(const TwoModeField& field, const ModelParams& p) {
  ModelParams decoupled = p;
  decoupled.eps = 0.0;
  TwoModeField g{gradient(field.alphas, decoupled), gradient(field.betas, decoupled)};
  if (field.alphas.size() != field.betas.size()) {
    throw Error(ErrorCode::invalid_argument, "species must have equal length");
  }
  g.alphas -= p.eps * field.betas.conjugate();
  g.betas -= p.eps * field.alphas.conjugate();
  return g;
}

std::vector<TwoModeAnalytic> two_mode_analytic(const ModelParams& p, int sites) {
  std::vector<TwoModeAnalytic> out;
  for (const auto& s : analytic_solutions(p, sites)) {
    out.push_back({true, s.kind, s.alpha, s.alpha, s.r, 2.0 * s.energy});
  }
  const double m = p.mu + 2.0 * p.j;
  const double s = p.u + 2.0 * p.v;
  const double disc = m * m - 4.0 * p.eps * p.eps;
  if (m >= 0.0 && disc >= 0.0) {
    const double root = std::sqrt(disc);
    const double big = 0.5 * (m + root);
    const double small = 0.5 * (m - root);
    const double e = -static_cast<double>(sites) * (0.5 * m * m - p.eps * p.eps) / s;
    const double sign = p.eps > 0.0 ? -1.0 : 1.0;
    out.push_back({false, Kind::uniform, std::sqrt(big / s), sign * std::sqrt(small / s), 1.0, e});
    out.push_back({false, Kind::uniform, std::sqrt(small / s), sign * std::sqrt(big / s), 1.0, e});
  }
  return out;
}

TwoModeField embed(const TwoModeAnalytic& s, int sites) {
  validate(LatticeSpec{sites, 1});
  TwoModeField f{Field(sites), Field(sites)};
  for (int j = 0; j < sites; ++j) {
    const double scale = (j % 2 == 0) ? 1.0 : s.r;
    f.alphas(j) = scale * s.alpha;
    f.betas(j) = scale * s.beta;
  }
  return f;
}

TwoModeRelaxResult two_mode_relax(TwoModeField field, const ModelParams& params,
                                  const FlowOptions& options) {
  require_solvable(params);
  check_field(field.alphas);
  check_field(field.betas);
  FlowTrace t = integrate(
      flatten(field), params.u, options,
      [&](const Field& f) { return two_mode_energy(split(f), params); },
      [&](const Field& f) { return flatten(two_mode_gradient(split(f), params)); });
  TwoModeRelaxResult r;
  r.field = split(t.state);
  r.energy = t.energy;
  r.residual = t.residual;
  r.steps = t.steps;
  r.rejected = t.rejected;
  r.converged = t.converged;
  r.energies = std::move(t.energies);
  return r;
}

}  // namespace latticevar::coherent
