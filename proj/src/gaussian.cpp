#include "latticevar/gaussian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "latticevar/error.hpp"

namespace latticevar::gaussian {

namespace {

constexpr int kMaxOrder = 8;

Complex pairings(const Eigen::MatrixXcd& pair, unsigned mask) {
  if (mask == 0) return {1.0, 0.0};
  const int a = std::countr_zero(mask);
  const unsigned rest = mask & (mask - 1);
  Complex total{0.0, 0.0};
  for (unsigned m = rest; m != 0; m &= m - 1) {
    const int b = std::countr_zero(m);
    total += pair(a, b) * pairings(pair, rest & ~(1u << b));
  }
  return total;
}

Eigen::MatrixXcd pair_values(const State& s, const std::vector<LinearForm>& forms) {
  const int k = static_cast<int>(forms.size());
  const Eigen::MatrixXd om = omega(s.sites());
  const Eigen::MatrixXcd q = s.v.cast<Complex>() + Complex{0.0, 1.0} * om.cast<Complex>();
  Eigen::MatrixXcd pair = Eigen::MatrixXcd::Zero(k, k);
  for (int a = 0; a < k; ++a) {
    const Eigen::RowVectorXcd left = forms[a].transpose() * q;
    for (int b = a + 1; b < k; ++b) pair(a, b) = left * forms[b];
  }
  return pair;
}

}  // namespace

Eigen::MatrixXd omega(int sites) {
  const int n = 2 * sites;
  Eigen::MatrixXd om = Eigen::MatrixXd::Zero(n, n);
  om.topRightCorner(sites, sites).setIdentity();
  om.bottomLeftCorner(sites, sites) = -Eigen::MatrixXd::Identity(sites, sites);
  return om;
}

State vacuum(int sites) {
  if (sites < 1) throw Error(ErrorCode::invalid_argument, "L must be >= 1");
  return {Eigen::VectorXd::Zero(2 * sites), Eigen::MatrixXd::Identity(2 * sites, 2 * sites)};
}

State from_coherent(const coherent::Field& field) {
  const int l = static_cast<int>(field.size());
  State s = vacuum(l);
  s.d.head(l) = 2.0 * field.real();
  s.d.tail(l) = 2.0 * field.imag();
  return s;
}

State random_pure(int sites, double squeeze_bound, std::uint64_t seed, double mean_scale) {
  if (!(squeeze_bound >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "squeeze bound must be >= 0");
  }
  State s = vacuum(sites);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Eigen::MatrixXcd z(sites, sites);
  for (int i = 0; i < sites; ++i) {
    for (int j = 0; j < sites; ++j) z(i, j) = Complex{normal(rng), normal(rng)};
  }
  const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(z).householderQ();
  Eigen::MatrixXd k(2 * sites, 2 * sites);
  k << q.real(), -q.imag(), q.imag(), q.real();
  Eigen::VectorXd diag(2 * sites);
  for (int j = 0; j < sites; ++j) {
    const double r = squeeze_bound * unit(rng);
    diag(j) = std::exp(-2.0 * r);
    diag(sites + j) = std::exp(2.0 * r);
  }
  s.v = k.transpose() * diag.asDiagonal() * k;
  s.v = 0.5 * (s.v + s.v.transpose()).eval();
  for (int m = 0; m < 2 * sites; ++m) s.d(m) = mean_scale * normal(rng);
  return s;
}

double purity_defect(const State& s) {
  const Eigen::MatrixXd vo = s.v * omega(s.sites());
  return (vo * vo + Eigen::MatrixXd::Identity(s.v.rows(), s.v.cols())).cwiseAbs().maxCoeff();
}

bool is_physical(const State& s, double tol) {
  const Eigen::MatrixXcd h =
      s.v.cast<Complex>() + Complex{0.0, 1.0} * omega(s.sites()).cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -tol;
}

void validate(const State& s) {
  const auto n = s.d.size();
  if (n < 2 || n % 2 != 0 || s.v.rows() != n || s.v.cols() != n) {
    throw Error(ErrorCode::invalid_argument, "state dimensions inconsistent");
  }
  if (!s.d.allFinite() || !s.v.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "state must be finite");
  }
  if ((s.v - s.v.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::invalid_argument, "covariance must be symmetric");
  }
}

Eigen::VectorXcd amplitudes(const State& s) {
  const int l = s.sites();
  Eigen::VectorXcd a(l);
  for (int j = 0; j < l; ++j) a(j) = 0.5 * Complex{s.d(j), s.d(l + j)};
  return a;
}

Eigen::MatrixXcd normal_moments(const State& s) {
  const int l = s.sites();
  const auto xx = s.v.topLeftCorner(l, l);
  const auto pp = s.v.bottomRightCorner(l, l);
  const auto xp = s.v.topRightCorner(l, l);
  const auto px = s.v.bottomLeftCorner(l, l);
  Eigen::MatrixXcd n(l, l);
  for (int j = 0; j < l; ++j) {
    for (int k = 0; k < l; ++k) {
      n(j, k) = 0.25 * Complex{xx(j, k) + pp(j, k) - (j == k ? 2.0 : 0.0), xp(j, k) - px(j, k)};
    }
  }
  return n;
}

Eigen::MatrixXcd anomalous_moments(const State& s) {
  const int l = s.sites();
  const auto xx = s.v.topLeftCorner(l, l);
  const auto pp = s.v.bottomRightCorner(l, l);
  const auto xp = s.v.topRightCorner(l, l);
  const auto px = s.v.bottomLeftCorner(l, l);
  Eigen::MatrixXcd m(l, l);
  for (int j = 0; j < l; ++j) {
    for (int k = 0; k < l; ++k) {
      m(j, k) = 0.25 * Complex{xx(j, k) - pp(j, k), xp(j, k) + px(j, k)};
    }
  }
  return m;
}

Complex central_moment(const State& s, std::span<const int> indices) {
  const int k = static_cast<int>(indices.size());
  if (k > kMaxOrder) throw Error(ErrorCode::invalid_argument, "moment order above 8");
  const int n = 2 * s.sites();
  std::vector<LinearForm> forms;
  for (int idx : indices) {
    if (idx < 0 || idx >= n) throw Error(ErrorCode::invalid_argument, "quadrature index out of range");
    LinearForm f = LinearForm::Zero(n);
    f(idx) = 1.0;
    forms.push_back(std::move(f));
  }
  if (k % 2 != 0) return {0.0, 0.0};
  return pairings(pair_values(s, forms), (1u << k) - 1u);
}

LinearForm annihilation(int sites, int j) {
  LinearForm f = LinearForm::Zero(2 * sites);
  f(j) = 0.5;
  f(sites + j) = Complex{0.0, 0.5};
  return f;
}

LinearForm creation(int sites, int j) {
  LinearForm f = LinearForm::Zero(2 * sites);
  f(j) = 0.5;
  f(sites + j) = Complex{0.0, -0.5};
  return f;
}

Complex product_moment(const State& s, const std::vector<LinearForm>& forms) {
  const int k = static_cast<int>(forms.size());
  if (k > kMaxOrder) throw Error(ErrorCode::invalid_argument, "moment order above 8");
  std::vector<Complex> means(k);
  for (int a = 0; a < k; ++a) {
    if (forms[a].size() != s.d.size()) {
      throw Error(ErrorCode::invalid_argument, "linear form has wrong length");
    }
    means[a] = forms[a].transpose() * s.d.cast<Complex>();
  }
  const Eigen::MatrixXcd pair = pair_values(s, forms);
  const unsigned full = (1u << k) - 1u;
  Complex total{0.0, 0.0};
  for (unsigned mask = 0; mask <= full; ++mask) {
    if (std::popcount(mask) % 2 != 0) continue;
    Complex shift{1.0, 0.0};
    for (int a = 0; a < k; ++a) {
      if (!(mask & (1u << a))) shift *= means[a];
    }
    if (shift == Complex{0.0, 0.0}) continue;
    total += shift * pairings(pair, mask);
  }
  return total;
}

double energy(const State& s, const ModelParams& p) {
  validate(s);
  const int l = s.sites();
  const Eigen::VectorXcd al = amplitudes(s);
  const Eigen::MatrixXcd n = normal_moments(s);
  const Eigen::MatrixXcd m = anomalous_moments(s);
  double e = 0.0;
  for (int j = 0; j < l; ++j) {
    const Complex a = al(j);
    const double a2 = std::norm(a);
    const double nj = n(j, j).real();
    const Complex mj = m(j, j);
    const double dens = a2 + nj;
    const double quartic = a2 * a2 + 4.0 * a2 * nj + 2.0 * (std::conj(a * a) * mj).real() +
                           2.0 * nj * nj + std::norm(mj);
    e += -p.mu * dens + 0.5 * p.u * quartic - p.eps * (a * a + mj).real();
    if (l < 2) continue;
    const int k = (j + 1) % l;
    const Complex b = al(k);
    e += -2.0 * p.j * (std::conj(a) * b + n(j, k)).real();
    const double w = a2 * std::norm(b) + a2 * n(k, k).real() + std::norm(b) * nj +
                     2.0 * (std::conj(a) * b * n(k, j)).real() +
                     2.0 * (std::conj(a) * std::conj(b) * m(j, k)).real() + std::norm(m(j, k)) +
                     nj * n(k, k).real() + (n(j, k) * n(k, j)).real();
    e += p.v * w;
  }
  return e;
}

double energy_via_moments(const State& s, const ModelParams& p) {
  validate(s);
  const int l = s.sites();
  Complex e{0.0, 0.0};
  for (int j = 0; j < l; ++j) {
    const LinearForm a = annihilation(l, j);
    const LinearForm c = creation(l, j);
    e += -p.mu * product_moment(s, {c, a});
    e += 0.5 * p.u * product_moment(s, {c, c, a, a});
    e += -0.5 * p.eps * (product_moment(s, {a, a}) + product_moment(s, {c, c}));
    const int k = (j + 1) % l;
    const LinearForm ak = annihilation(l, k);
    const LinearForm ck = creation(l, k);
    e += -p.j * (product_moment(s, {c, ak}) + product_moment(s, {ck, a}));
    e += p.v * product_moment(s, {c, a, ck, ak});
  }
  return e.real();
}

Gradients gradients(const State& s, const ModelParams& p) {
  validate(s);
  const int l = s.sites();
  const Eigen::VectorXcd al = amplitudes(s);
  const Eigen::MatrixXcd n = normal_moments(s);
  const Eigen::MatrixXcd m = anomalous_moments(s);
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(l);  // dE/d(alpha^*)
  Eigen::MatrixXcd ga = Eigen::MatrixXcd::Zero(l, l);  // dE/dN_jk
  Eigen::MatrixXcd gb = Eigen::MatrixXcd::Zero(l, l);  // dE/dM_jk

  for (int j = 0; j < l; ++j) {
    const Complex a = al(j);
    const double a2 = std::norm(a);
    const double nj = n(j, j).real();
    const Complex mj = m(j, j);
    g(j) += -p.mu * a + p.u * (a2 * a + 2.0 * a * nj + std::conj(a) * mj) - p.eps * std::conj(a);
    ga(j, j) += -p.mu + 2.0 * p.u * (a2 + nj);
    gb(j, j) += 0.5 * p.u * (std::conj(a * a) + std::conj(mj)) - 0.5 * p.eps;

    const int k = (j + 1) % l;
    const Complex b = al(k);
    g(j) += -p.j * b;
    g(k) += -p.j * a;
    ga(j, k) += -p.j;
    ga(k, j) += -p.j;

    const double b2 = std::norm(b);
    g(j) += p.v * (a * b2 + a * n(k, k).real() + b * n(k, j) + std::conj(b) * m(j, k));
    g(k) += p.v * (b * a2 + b * nj + a * n(j, k) + std::conj(a) * m(j, k));
    ga(k, k) += p.v * (a2 + nj);
    ga(j, j) += p.v * (b2 + n(k, k).real());
    ga(k, j) += p.v * (std::conj(a) * b + n(j, k));
    ga(j, k) += p.v * (std::conj(b) * a + n(k, j));
    gb(j, k) += p.v * (std::conj(a) * std::conj(b) + std::conj(m(j, k)));
  }

  Gradients out;
  out.d.resize(2 * l);
  out.d.head(l) = g.real();
  out.d.tail(l) = g.imag();
  Eigen::MatrixXd raw(2 * l, 2 * l);
  raw.topLeftCorner(l, l) = 0.25 * ga.real() + 0.5 * gb.real();
  raw.bottomRightCorner(l, l) = 0.25 * ga.real() - 0.5 * gb.real();
  raw.topRightCorner(l, l) = -0.25 * ga.imag() - 0.5 * gb.imag();
  raw.bottomLeftCorner(l, l) = 0.25 * ga.imag() - 0.5 * gb.imag();
  out.v = 0.5 * (raw + raw.transpose());
  return out;
}

void project_pure(State& s, double tol) {
  const Eigen::MatrixXd om = omega(s.sites());
  double defect = purity_defect(s);
  for (int it = 0; it < 60 && defect > tol; ++it) {
    const Eigen::MatrixXd inv = s.v.ldlt().solve(Eigen::MatrixXd::Identity(s.v.rows(), s.v.cols()));
    Eigen::MatrixXd next = 0.5 * (s.v + om * inv * om.transpose());
    s.v = 0.5 * (next + next.transpose());
    const double updated = purity_defect(s);
    if (!std::isfinite(updated)) break;
    defect = updated;
  }
  if (!(defect <= tol)) {
    throw Error(ErrorCode::purity_projection, "purity defect could not be reduced below tolerance");
  }
}

namespace {

struct Velocity {
  Eigen::VectorXd d;
  Eigen::MatrixXd v;
};

Velocity velocity(const State& s, const ModelParams& p, const Eigen::MatrixXd& om) {
  const Gradients g = gradients(s, p);
  Velocity out;
  out.d = -2.0 * s.v * g.d;
  out.v = 4.0 * om.transpose() * g.v * om - 4.0 * s.v * g.v * s.v;
  out.v = 0.5 * (out.v + out.v.transpose()).eval();
  return out;
}

double velocity_norm(const Velocity& v) {
  return std::max(v.d.cwiseAbs().maxCoeff(), v.v.cwiseAbs().maxCoeff());
}

State shifted(const State& s, const Velocity& k, double h) {
  return {s.d + h * k.d, s.v + h * k.v};
}

}  // namespace

RelaxResult flow_relax(State state, const ModelParams& p, const FlowOptions& options) {
  require_solvable(p);
  validate(state);
  if (!(options.step > 0.0) || !(options.velocity_tol > 0.0) || !(options.purity_tol > 0.0) ||
      options.max_steps < 0) {
    throw Error(ErrorCode::invalid_argument, "flow options must be positive");
  }
  const Eigen::MatrixXd om = omega(state.sites());
  const double projection_trigger = options.purity_tol / 10.0;
  const double projection_target = std::min(1e-12, projection_trigger);
  if (purity_defect(state) > projection_trigger) project_pure(state, projection_target);

  const double base = options.step / p.u;
  double h = base;
  RelaxResult out;
  out.energy = energy(state, p);
  out.max_defect = purity_defect(state);
  Velocity k1 = velocity(state, p, om);
  out.velocity = velocity_norm(k1);
  if (options.record) {
    out.energies.push_back(out.energy);
    out.defects.push_back(out.max_defect);
  }

  double window_energy = out.energy;
  long window_start = 0;
  while (out.velocity >= options.velocity_tol && out.steps < options.max_steps) {
    if (options.stall_window > 0 && out.steps - window_start >= options.stall_window) {
      if (window_energy - out.energy <= options.stall_tol * std::abs(out.energy)) {
        out.stalled = true;
        break;
      }
      window_energy = out.energy;
      window_start = out.steps;
    }
    const Velocity k2 = velocity(shifted(state, k1, 0.5 * h), p, om);
    const Velocity k3 = velocity(shifted(state, k2, 0.5 * h), p, om);
    const Velocity k4 = velocity(shifted(state, k3, h), p, om);
    State next{state.d + (h / 6.0) * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d),
               state.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
    next.v = 0.5 * (next.v + next.v.transpose()).eval();
    bool ok = next.d.allFinite() && next.v.allFinite();
    double e_next = 0.0;
    if (ok) {
      try {
        if (purity_defect(next) > projection_trigger) project_pure(next, projection_target);
        e_next = energy(next, p);
        ok = e_next <= out.energy + 1e-13 * std::abs(out.energy);
      } catch (const Error&) {
        ok = false;
      }
    }
    if (!ok) {
      ++out.rejected;
      h *= 0.5;
      if (h < 1e-14) throw Error(ErrorCode::step_collapse, "flow step collapsed below 1e-14");
      continue;
    }
    state = std::move(next);
    out.energy = e_next;
    const double defect = purity_defect(state);
    out.max_defect = std::max(out.max_defect, defect);
    k1 = velocity(state, p, om);
    out.velocity = velocity_norm(k1);
    ++out.steps;
    if (options.record) {
      out.energies.push_back(out.energy);
      out.defects.push_back(defect);
    }
    h = std::min(base, 2.0 * h);
  }
  out.converged = out.velocity < options.velocity_tol;
  out.state = std::move(state);
  return out;
}

RelaxResult multistart_ground(const ModelParams& p, int sites, int n_starts, std::uint64_t seed,
                              const FlowOptions& options) {
  if (n_starts < 0) throw Error(ErrorCode::invalid_argument, "n_starts must be >= 0");
  std::vector<State> starts;
  for (const auto& s : coherent::analytic_solutions(p, sites)) {
    State start = from_coherent(coherent::embed(s, sites));
    // Zero displacement is invariant under the flow; a small offset lets it leave.
    if (start.d.cwiseAbs().maxCoeff() == 0.0) start.d.head(sites).setConstant(1e-3);
    starts.push_back(std::move(start));
  }
  const double m = p.mu + p.eps + 2.0 * p.j;
  const double alpha_sf = m > 0.0 ? std::sqrt(m / (p.u + 2.0 * p.v)) : 0.0;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n_starts; ++i) {
    starts.push_back(random_pure(sites, 1.0, rng(), 2.0 * std::max(1.0, alpha_sf)));
  }
  RelaxResult best;
  bool found = false;
  for (State& start : starts) {
    RelaxResult r = flow_relax(std::move(start), p, options);
    if (!found || r.energy < best.energy) {
      best = std::move(r);
      found = true;
    }
  }
  return best;
}

PhiMoments phi_moments_wick(const State& s) {
  validate(s);
  const int l = s.sites();
  if (l % 2 != 0) throw Error(ErrorCode::invalid_argument, "L must be even");
  std::vector<LinearForm> a(l), c(l);
  for (int j = 0; j < l; ++j) {
    a[j] = annihilation(l, j);
    c[j] = creation(l, j);
  }
  const auto sign = [](int j) { return j % 2 == 0 ? 1.0 : -1.0; };
  PhiMoments out;
  for (int i = 0; i < l; ++i) {
    out.m1 += sign(i) * product_moment(s, {c[i], a[i]}).real();
    for (int j = 0; j < l; ++j) {
      out.m2 += sign(i) * sign(j) * product_moment(s, {c[i], a[i], c[j], a[j]}).real();
      for (int k = 0; k < l; ++k) {
        for (int q = 0; q < l; ++q) {
          const double w = sign(i) * sign(j) * sign(k) * sign(q);
          out.m4 += w * product_moment(s, {c[i], a[i], c[j], a[j], c[k], a[k], c[q], a[q]}).real();
        }
      }
    }
  }
  return out;
}

double binder_from_moments(const PhiMoments& m) {
  if (!(m.m2 >= 1e-12)) {
    throw Error(ErrorCode::degenerate, "<phi^2> below 1e-12, Binder ratio undefined");
  }
  return 0.5 * (3.0 - m.m4 / (m.m2 * m.m2));
}

double binder_dw(const State& s) { return binder_from_moments(phi_moments(s)); }

}  // namespace latticevar::gaussian
