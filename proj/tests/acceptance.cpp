// Acceptance suite: one PASS/FAIL line per criterion, including runtime.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fock_oracle.hpp"
#include "latticevar/analysis.hpp"
#include "latticevar/coherent.hpp"
#include "latticevar/ed.hpp"
#include "latticevar/gaussian.hpp"
#include "latticevar/meanfield.hpp"
#include "latticevar/model.hpp"

using namespace latticevar;
using Complex = std::complex<double>;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buffer[256];
  std::snprintf(buffer, sizeof buffer, f, a, b, c, d);
  return buffer;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Draws in a fixed order: mu/U, 2J/U, 2V/U, eps/U.
ModelParams random_params(std::mt19937_64& rng, double mu_hi, double j_lo, double j_hi, double v_hi,
                          double eps_hi) {
  const double mu = uniform(rng, 0.0, mu_hi);
  const double two_j = uniform(rng, j_lo, j_hi);
  const double two_v = uniform(rng, 0.0, v_hi);
  const double eps = uniform(rng, 0.0, eps_hi);
  return from_ratios(mu, two_j, two_v, eps);
}

coherent::Field random_field(std::mt19937_64& rng, int sites, double scale) {
  coherent::Field f(sites);
  for (int j = 0; j < sites; ++j) {
    const double r = uniform(rng, 0.0, scale);
    f(j) = std::polar(r, uniform(rng, 0.0, 2.0 * std::numbers::pi));
  }
  return f;
}

// Two-sublattice real amplitudes (x on odd, y on even sites), energy per pair.
struct PairFunctional {
  double mu_eff, j, u, v;
  explicit PairFunctional(const ModelParams& p) : mu_eff(p.mu + p.eps), j(p.j), u(p.u), v(p.v) {}
  double value(double x, double y) const {
    return -mu_eff * (x * x + y * y) - 4 * j * x * y + 0.5 * u * (std::pow(x, 4) + std::pow(y, 4)) +
           2 * v * x * x * y * y;
  }
  std::array<double, 2> grad(double x, double y) const {
    return {-2 * mu_eff * x - 4 * j * y + 2 * u * x * x * x + 4 * v * x * y * y,
            -2 * mu_eff * y - 4 * j * x + 2 * u * y * y * y + 4 * v * x * x * y};
  }
  std::array<double, 3> hess(double x, double y) const {
    return {-2 * mu_eff + 6 * u * x * x + 4 * v * y * y, -4 * j + 8 * v * x * y,
            -2 * mu_eff + 6 * u * y * y + 4 * v * x * x};
  }
};

// Lowest staggered (x != y) local minimum of the pair functional by Newton
// polishing from a grid; NaN when none exists.
double oracle_staggered_pair(const ModelParams& p) {
  const PairFunctional f(p);
  const double reach = 3.0 * std::sqrt(std::max(1.0, f.mu_eff + 2 * f.j) / p.u);
  double best = std::nan("");
  for (int a = 1; a <= 24; ++a) {
    for (int b = 1; b <= 24; ++b) {
      double x = reach * a / 24.0, y = reach * b / 24.0;
      for (int it = 0; it < 200; ++it) {
        const auto g = f.grad(x, y);
        const auto h = f.hess(x, y);
        const double det = h[0] * h[2] - h[1] * h[1];
        if (std::abs(det) < 1e-300) break;
        const double dx = (h[2] * g[0] - h[1] * g[1]) / det;
        const double dy = (h[0] * g[1] - h[1] * g[0]) / det;
        x -= dx;
        y -= dy;
        if (std::abs(dx) + std::abs(dy) < 1e-15 * (1 + std::abs(x) + std::abs(y))) break;
      }
      const auto g = f.grad(x, y);
      const auto h = f.hess(x, y);
      const bool minimum = h[0] > 0 && h[0] * h[2] - h[1] * h[1] > 0;
      if (!std::isfinite(x) || !std::isfinite(y) || !minimum) continue;
      if (std::abs(g[0]) + std::abs(g[1]) > 1e-9) continue;
      if (std::abs(std::abs(x) - std::abs(y)) < 1e-6 * (std::abs(x) + std::abs(y))) continue;
      const double e = f.value(x, y);
      if (std::isnan(best) || e < best) best = e;
    }
  }
  return best;
}

double oracle_uniform_site(const ModelParams& p) {
  const double m = p.mu + p.eps + 2 * p.j;
  return m > 0 ? -m * m / (2 * (p.u + 2 * p.v)) : 0.0;
}

// ---------------------------------------------------------------------------

Outcome coherent_boundary() {
  Outcome out;
  double worst = 0.0, flow_checks = 0;
  for (double two_j : {0.4, 0.8}) {
    for (double eps : {0.0, 0.2, 0.4}) {
      const double expected = 2.0 * two_j / (1.5 - 1.0) - eps;
      const auto label = [&](double mu) {
        return coherent::analytic_is_staggered(from_ratios(mu, two_j, 1.5, eps)) ? 1 : 0;
      };
      const auto r = analysis::boundary_bisect(label, 0.0, 2.0 * expected + 1.0, 1e-9);
      worst = std::max(worst, std::abs(r.value - expected));
      // Random-start flows agree on either side of the line.
      for (double side : {-0.05, 0.05}) {
        const auto f = coherent::multistart_ground(from_ratios(expected + side, two_j, 1.5, eps), 8, 2, 3);
        const double drho = std::norm(f.field(0)) - std::norm(f.field(1));
        if ((std::abs(drho) > 1e-6) != (side > 0)) out.pass = false;
        ++flow_checks;
      }
    }
  }
  out.pass = out.pass && worst <= 1e-6;
  out.detail = fmt("max |mu_c - (4J/(2V/U-1) - eps)| = %.2e over 6 points; %g flow side checks", worst, flow_checks);
  return out;
}

Outcome analytic_coherent_energies() {
  Outcome out;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int ss_violations = 0;
  for (int t = 0; t < 200; ++t) {
    const double two_v = uniform(rng, 1.2, 3.0);
    const double two_j = uniform(rng, 0.2, 1.2);
    const double eps = uniform(rng, 0.0, 0.5);
    const double a = uniform(rng, 2.05, 6.0);
    const double mu = a / (two_v - 1.0) * two_j - eps;
    const ModelParams p = from_ratios(mu, two_j, two_v, eps);
    const int sites = 8;
    const double e_sf = sites * oracle_uniform_site(p);
    const double e_ss = sites / 2 * oracle_staggered_pair(p);
    if (std::isnan(e_ss) || e_ss > e_sf) ++ss_violations;
    const double target = std::min(e_sf, std::isnan(e_ss) ? e_sf : e_ss);
    const auto r = coherent::multistart_ground(p, sites, 4, 100 + t);
    worst = std::max(worst, std::abs(r.energy - target) / std::abs(target));
  }
  // Quadratic approach of the two branches at a -> 2+.
  std::vector<double> lx, ly;
  for (double delta : {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3}) {
    const double two_v = 1.5, two_j = 0.8, eps = 0.2;
    const double mu = (2.0 + delta) / (two_v - 1.0) * two_j - eps;
    const ModelParams p = from_ratios(mu, two_j, two_v, eps);
    const double gap = 2 * oracle_uniform_site(p) - oracle_staggered_pair(p);
    lx.push_back(std::log(delta));
    ly.push_back(std::log(gap));
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.pass = worst <= 1e-8 && ss_violations == 0 && std::abs(exponent - 2.0) <= 0.1;
  out.detail = fmt("max rel energy error %.2e; E_SS>E_SF at %g points; gap exponent %.4f", worst,
                   ss_violations, exponent);
  return out;
}

Outcome atomic_limit() {
  Outcome out;
  int mismatched_occ = 0, ties = 0, points = 0;
  double worst_mf = 0.0, worst_ed = 0.0;
  struct Sample {
    double mu, two_v, e_pair;
  };
  std::vector<Sample> samples;
  for (int i = 0; i < 40; ++i) {
    for (int k = 0; k < 40; ++k) {
      const double mu = (i + 0.5) * 3.0 / 40.0;
      const double two_v = (k + 0.5) * 3.0 / 40.0;
      if (std::abs(two_v - 1.0) < 1e-12) continue;
      // Brute force over occupations.
      double best = INFINITY, second = INFINITY;
      int bo = 0, be = 0;
      for (int a = 0; a <= 12; ++a) {
        for (int b = 0; b <= a; ++b) {
          const double e = -mu * (a + b) + two_v * a * b + 0.5 * (a * (a - 1) + b * (b - 1));
          if (e < best - 1e-12) {
            second = best;
            best = e;
            bo = a;
            be = b;
          } else if (e < second) {
            second = e;
          }
        }
      }
      const ModelParams p = from_ratios(mu, 0.0, two_v, 0.0);
      const auto s = mf::multistart(p, 8, 17 + i * 40 + k);
      ++points;
      worst_mf = std::max(worst_mf, std::abs(s.e_pair - best));
      if (second - best < 1e-9) {
        ++ties;
      } else if (std::abs(s.rho_o - bo) > 1e-12 || std::abs(s.rho_e - be) > 1e-12) {
        ++mismatched_occ;
      }
      if ((i * 40 + k) % 80 == 7) samples.push_back({mu, two_v, best});
    }
  }
  for (const auto& smp : samples) {
    const auto g = ed::solve(from_ratios(smp.mu, 0.0, smp.two_v, 0.0), {4, 5});
    worst_ed = std::max(worst_ed, std::abs(g.energy - 2.0 * smp.e_pair));
  }
  out.pass = worst_mf <= 1e-12 && mismatched_occ == 0 && worst_ed <= 1e-12 && samples.size() == 20;
  out.detail = fmt("%g grid points, MF energy error %.1e, occupation mismatches %g, ED error %.1e",
                   points, worst_mf, mismatched_occ, worst_ed);
  out.detail += fmt(" on %g ED points (%g exact ties)", static_cast<double>(samples.size()), ties);
  return out;
}

Outcome perturbative_boundary() {
  Outcome out;
  double worst = 0.0, tip_error = 0.0;
  const std::vector<double> mus{0.1, 0.25, std::sqrt(2.0) - 1.0, 0.6, 0.85,
                                1.15, 1.3, std::sqrt(6.0) - 1.0, 1.7, 1.9};
  for (double mu : mus) {
    const int n = static_cast<int>(std::ceil(mu));
    const double chi = (n + 1) / (n - mu) + n / (mu - n + 1);
    const double expected = 1.0 / chi;  // 2J_c/U with chi_o = chi_e at V = 0
    const auto label = [mu](double two_j) {
      const auto s = mf::multistart(from_ratios(mu, two_j, 0.0, 0.0), 0, 1);
      const auto ph = mf::classify(s);
      return ph == mf::Phase::SF || ph == mf::Phase::SS ? 1 : 0;
    };
    const auto r = analysis::boundary_bisect(label, 0.005, 0.8, 1e-4);
    worst = std::max(worst, std::abs(r.value - expected));
    if (std::abs(mu - (std::sqrt(2.0) - 1.0)) < 1e-12) {
      tip_error = std::abs(r.value - (3.0 - 2.0 * std::sqrt(2.0)));
    }
  }
  out.pass = worst <= 2e-3 && tip_error <= 2e-3;
  out.detail = fmt("max |2J_c numeric - 1/chi| = %.2e over 10 mu values; lobe tip error %.2e", worst,
                   tip_error);
  return out;
}

Outcome insulator_shrinkage() {
  Outcome out;
  std::vector<int> areas;
  for (double eps : {0.0, 0.15, 0.30}) {
    int insulating = 0;
    for (int i = 0; i < 50; ++i) {
      for (int k = 0; k < 50; ++k) {
        const double two_j = i / 49.0;
        const double mu = 3.0 * k / 49.0;
        const auto s = mf::multistart(from_ratios(mu, two_j, 1.5, eps), 0, 1);
        const auto ph = mf::classify(s);
        if (ph == mf::Phase::MI || ph == mf::Phase::DW) ++insulating;
      }
    }
    areas.push_back(insulating);
  }
  out.pass = areas[0] > 0 && areas[1] <= areas[0] && areas[2] <= areas[1];
  out.detail = fmt("insulating cells of 2500 at eps/U = 0, 0.15, 0.30: %g, %g, %g", areas[0], areas[1],
                   areas[2]);
  return out;
}

Outcome supersolid_enhancement() {
  Outcome out;
  const auto mf_boundary = [](double two_j, double eps) {
    const auto label = [&](double mu) {
      const auto ph = mf::classify(mf::multistart(from_ratios(mu, two_j, 1.5, eps), 0, 1));
      return ph == mf::Phase::DW || ph == mf::Phase::SS ? 1 : 0;
    };
    return analysis::boundary_bisect(label, 0.5, 12.0, 1e-6).value;
  };
  std::vector<double> eps_grid;
  for (int k = 0; k <= 7; ++k) eps_grid.push_back(0.3 + 0.1 * k);

  double max_step = -INFINITY;
  double prev = mf_boundary(0.8, eps_grid[0]);
  for (std::size_t k = 1; k < eps_grid.size(); ++k) {
    const double cur = mf_boundary(0.8, eps_grid[k]);
    max_step = std::max(max_step, (cur - prev) / (eps_grid[k] - eps_grid[k - 1]));
    prev = cur;
  }

  double coherent_dev = 0.0;
  double last = 0.0;
  for (int k = 0; k <= 4; ++k) {
    const double eps = 0.25 * k;
    const auto label = [&](double mu) {
      return coherent::analytic_is_staggered(from_ratios(mu, 0.8, 1.5, eps)) ? 1 : 0;
    };
    const double mu_c = analysis::boundary_bisect(label, 0.0, 8.0, 1e-11).value;
    if (k > 0) coherent_dev = std::max(coherent_dev, std::abs((mu_c - last) / 0.25 + 1.0));
    last = mu_c;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double eps : eps_grid) {
    const double mu_c = mf_boundary(2.0, eps);
    sx += eps;
    sy += mu_c;
    sxx += eps * eps;
    sxy += eps * mu_c;
  }
  const double n = static_cast<double>(eps_grid.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  out.pass = max_step < 0.0 && coherent_dev <= 1e-8 && slope >= -1.2 && slope <= -0.8;
  out.detail = fmt("MF 2J/U=0.8 max dmu_c/deps on [0.3,1] = %.4f; coherent slope deviation %.1e; "
                   "MF 2J/U=2 slope on [0.3,1] = %.4f",
                   max_step, coherent_dev, slope);
  return out;
}

Outcome variational_hierarchy() {
  Outcome out;
  std::mt19937_64 rng(77);
  int violations = 0;
  double min_gap_g = INFINITY, min_gap_c = INFINITY, min_gap_mf = INFINITY;
  int max_cutoff = 0;
  for (int t = 0; t < 30; ++t) {
    const ModelParams p = random_params(rng, 1.5, 0.0, 0.6, 2.0, 0.4);
    ed::EDGroundState e;
    try {
      e = ed::solve_converged(p, {4, 4}, 1e-8);
    } catch (const std::exception& ex) {
      out.pass = false;
      out.detail = fmt("ED failed at mu/U=%.6g 2J/U=%.6g 2V/U=%.6g eps/U=%.6g: ", p.mu / p.u, 2 * p.j / p.u,
                       2 * p.v / p.u, p.eps / p.u) + ex.what();
      return out;
    }
    max_cutoff = std::max(max_cutoff, e.lattice.n_max);
    const double g = gaussian::multistart_ground(p, 4, 4, t).energy;
    const double c = coherent::multistart_ground(p, 4, 8, t).energy;
    const double m = 2.0 * mf::multistart(p, 8, t).e_pair;
    const double slack = 1e-9 * std::max(1.0, std::abs(e.energy));
    if (!(e.energy <= g + slack && g <= c + slack && e.energy <= m + slack)) ++violations;
    min_gap_g = std::min(min_gap_g, g - e.energy);
    min_gap_c = std::min(min_gap_c, c - g);
    min_gap_mf = std::min(min_gap_mf, m - e.energy);
  }
  out.pass = violations == 0;
  out.detail = fmt("violations %g; min E_G-E_ED %.2e, min E_coh-E_G %.2e, min E_MF-E_ED %.2e",
                   violations, min_gap_g, min_gap_c, min_gap_mf);
  out.detail += fmt(" (ED cutoff up to %g)", max_cutoff);
  return out;
}

// Enumerates every quadrature word of length <= 8 by prepending operators to
// cached Fock vectors.
void compare_words(const oracle::FockState& f, const gaussian::State& s, const Eigen::VectorXcd& vec,
                   std::vector<int>& word, const Eigen::VectorXd& means, double& worst, long& count) {
  const int quads = 2 * f.modes();
  for (int q = 0; q < quads; ++q) {
    const Eigen::VectorXcd next = f.quadrature(vec, q) - means(q) * vec;
    word.insert(word.begin(), q);
    const Complex fock = f.vector().dot(next);
    const Complex wick = gaussian::central_moment(s, word);
    worst = std::max(worst, std::abs(fock - wick) / std::max(1.0, std::abs(wick)));
    ++count;
    if (word.size() < 8) compare_words(f, s, next, word, means, worst, count);
    word.erase(word.begin());
  }
}

Outcome wick_oracle() {
  Outcome out;
  std::mt19937_64 rng(4242);
  double worst = 0.0;
  long count = 0;
  for (int t = 0; t < 100; ++t) {
    const int modes = t < 50 ? 1 : 2;
    oracle::FockState f(modes, 40);
    for (int j = 0; j < modes; ++j) {
      f.squeeze(j, uniform(rng, 0.0, 0.4));
      f.rotate(j, uniform(rng, 0.0, 2 * std::numbers::pi));
    }
    if (modes == 2) {
      const double theta = uniform(rng, 0.0, 1.5);
      f.beam_splitter(theta, uniform(rng, 0.0, 2 * std::numbers::pi));
    }
    for (int j = 0; j < modes; ++j) {
      const double r = uniform(rng, 0.0, 1.0);
      f.displace(j, std::polar(r, uniform(rng, 0.0, 2 * std::numbers::pi)));
    }
    gaussian::State s{f.means(), f.covariance()};
    s.v = 0.5 * (s.v + s.v.transpose()).eval();
    std::vector<int> word;
    compare_words(f, s, f.vector(), word, s.d, worst, count);
  }
  out.pass = worst <= 1e-6;
  out.detail = fmt("%g moments of order 1-8 on 100 states, max relative deviation %.2e",
                   static_cast<double>(count), worst);
  return out;
}

Outcome flow_integrity() {
  Outcome out;
  std::mt19937_64 rng(99);
  int bad_coherent = 0, bad_gaussian = 0;
  double max_defect = 0.0;
  long accepted = 0;
  for (int t = 0; t < 50; ++t) {
    const ModelParams p = random_params(rng, 3.0, 0.1, 1.0, 2.5, 0.5);
    coherent::FlowOptions o;
    o.record_energies = true;
    const auto r = coherent::relax(random_field(rng, 8, 2.0), p, o);
    for (std::size_t k = 1; k < r.energies.size(); ++k) {
      if (r.energies[k] > r.energies[k - 1] + 1e-12 * std::abs(r.energies[k - 1])) ++bad_coherent;
    }
    accepted += static_cast<long>(r.energies.size());
  }
  for (int t = 0; t < 50; ++t) {
    const ModelParams p = random_params(rng, 2.0, 0.1, 1.0, 2.0, 0.5);
    gaussian::FlowOptions o;
    o.record = true;
    const auto r = gaussian::flow_relax(gaussian::random_pure(4, 0.8, 500 + t, 1.0), p, o);
    for (std::size_t k = 1; k < r.energies.size(); ++k) {
      if (r.energies[k] > r.energies[k - 1] + 1e-12 * std::abs(r.energies[k - 1])) ++bad_gaussian;
    }
    for (double d : r.defects) max_defect = std::max(max_defect, d);
    accepted += static_cast<long>(r.energies.size());
  }
  out.pass = bad_coherent == 0 && bad_gaussian == 0 && max_defect <= 1e-6;
  out.detail = fmt("%g accepted steps; energy rises coherent %g gaussian %g; max purity defect %.1e",
                   static_cast<double>(accepted), bad_coherent, bad_gaussian, max_defect);
  return out;
}

Outcome gradient_checks() {
  Outcome out;
  std::mt19937_64 rng(31);
  const double h = 1e-5;
  double worst_c = 0.0, worst_g = 0.0;
  for (int t = 0; t < 50; ++t) {
    const ModelParams p = random_params(rng, 3.0, 0.0, 1.0, 2.5, 0.5);
    const coherent::Field f = random_field(rng, 8, 2.0);
    const coherent::Field g = coherent::gradient(f, p);
    coherent::Field fd(8);
    for (int j = 0; j < 8; ++j) {
      const auto probe = [&](Complex dz) {
        coherent::Field q = f;
        q(j) += dz;
        return coherent::energy(q, p);
      };
      fd(j) = 0.5 * Complex((probe(h) - probe(-h)) / (2 * h),
                            (probe(Complex(0, h)) - probe(Complex(0, -h))) / (2 * h));
    }
    worst_c = std::max(worst_c, (fd - g).norm() / g.norm());
  }
  for (int t = 0; t < 50; ++t) {
    const ModelParams p = random_params(rng, 2.0, 0.0, 1.0, 2.0, 0.5);
    const gaussian::State s = gaussian::random_pure(4, 0.6, 900 + t, 1.0);
    const auto g = gaussian::gradients(s, p);
    Eigen::VectorXd analytic(8 + 36), numeric(8 + 36);
    int k = 0;
    for (int m = 0; m < 8; ++m, ++k) {
      gaussian::State a = s, b = s;
      a.d(m) += h;
      b.d(m) -= h;
      numeric(k) = (gaussian::energy(a, p) - gaussian::energy(b, p)) / (2 * h);
      analytic(k) = g.d(m);
    }
    for (int m = 0; m < 8; ++m) {
      for (int n = m; n < 8; ++n, ++k) {
        gaussian::State a = s, b = s;
        a.v(m, n) += h;
        b.v(m, n) -= h;
        if (m != n) {
          a.v(n, m) += h;
          b.v(n, m) -= h;
        }
        numeric(k) = (gaussian::energy(a, p) - gaussian::energy(b, p)) / (2 * h);
        analytic(k) = m == n ? g.v(m, m) : 2 * g.v(m, n);
      }
    }
    worst_g = std::max(worst_g, (numeric - analytic).norm() / analytic.norm());
  }
  out.pass = worst_c <= 1e-6 && worst_g <= 1e-6;
  out.detail = fmt("max relative deviation coherent %.2e, gaussian %.2e", worst_c, worst_g);
  return out;
}

Outcome analysis_oracles() {
  Outcome out;
  std::vector<std::pair<double, double>> pts;
  for (double l : {8.0, 16.0, 32.0, 64.0, 128.0}) pts.emplace_back(l, 2.0 + 3.0 * std::pow(l, -1.5));
  const auto fit = analysis::fss_fit(pts);
  const double fit_err = std::max({std::abs(fit.mu_inf - 2.0), std::abs(fit.beta - 3.0), std::abs(fit.eta - 1.5)});

  std::mt19937_64 rng(5);
  double binder_err = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double phi2 = uniform(rng, 0.1, 10.0);
    const double phi4 = phi2 * phi2 * uniform(rng, 1.0, 3.0);
    const double b = analysis::binder_from_moments(phi2, phi4);
    for (double s : {1e-3, 0.5, 7.0, 1e3}) {
      binder_err = std::max(binder_err,
                            std::abs(analysis::binder_from_moments(s * s * phi2, std::pow(s, 4) * phi4) - b));
    }
  }

  double extract_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    const double target = uniform(rng, 1.2, 3.8);
    const double s1 = uniform(rng, 0.5, 2.0), s2 = -uniform(rng, 0.5, 2.0), c = uniform(rng, -1, 1);
    analysis::Curve a, b, ramp;
    for (int k = 0; k <= 10; ++k) {
      const double x = 0.5 + 0.4 * k;
      a.x.push_back(x);
      a.y.push_back(c + s1 * (x - target));
      b.x.push_back(x);
      b.y.push_back(c + s2 * (x - target));
      ramp.x.push_back(x);
      ramp.y.push_back(s1 * (x - target));
    }
    extract_err = std::max(extract_err, std::abs(analysis::crossing_point(a, b) - target));
    const double tol = 1e-6;
    extract_err = std::max(extract_err,
                           std::abs(analysis::critical_mu_zero_threshold(ramp, tol) - (target + tol / s1)));
  }
  out.pass = fit_err <= 1e-3 && binder_err <= 1e-12 && extract_err <= 1e-6;
  out.detail = fmt("fss fit error %.1e, binder scale error %.1e, crossing/threshold error %.1e", fit_err,
                   binder_err, extract_err);
  return out;
}

Outcome two_mode() {
  Outcome out;
  std::mt19937_64 rng(12);
  const int sites = 8;
  double balanced_err = 0.0, residual = 0.0, phase_err = 0.0;
  int unbalanced = 0, below_balanced = 0;
  for (int t = 0; t < 50; ++t) {
    const ModelParams p = random_params(rng, 3.0, 0.1, 1.0, 2.5, 0.5);
    double best_single = INFINITY, best_pair = INFINITY;
    for (int k = 0; k < 4; ++k) {
      const coherent::Field f = random_field(rng, sites, 2.0);
      best_single = std::min(best_single, coherent::relax(f, p).energy);
      best_pair = std::min(best_pair, coherent::two_mode_relax({f, f}, p).energy);
    }
    balanced_err = std::max(balanced_err, std::abs(best_pair - 2 * best_single) / std::abs(2 * best_single));

    const double balanced_min =
        2 * std::min(best_single, coherent::multistart_ground(p, sites, 0, 1).energy);
    const double m = p.mu + 2 * p.j;
    for (const auto& s : coherent::two_mode_analytic(p, sites)) {
      if (s.balanced) continue;
      ++unbalanced;
      const double k3 = p.u + 2 * p.v;
      residual = std::max(residual, std::abs(k3 * std::pow(s.alpha, 3) - m * s.alpha - p.eps * s.beta));
      residual = std::max(residual, std::abs(k3 * std::pow(s.beta, 3) - m * s.beta - p.eps * s.alpha));
      const auto g = coherent::two_mode_gradient(coherent::embed(s, sites), p);
      residual = std::max(residual, std::max(g.alphas.cwiseAbs().maxCoeff(), g.betas.cwiseAbs().maxCoeff()));
      if (s.energy < balanced_min - 1e-9 * std::abs(balanced_min)) ++below_balanced;
    }

    const coherent::TwoModeField f{random_field(rng, sites, 2.0), random_field(rng, sites, 2.0)};
    const double e0 = coherent::two_mode_energy(f, p);
    for (int k = 0; k < 64; ++k) {
      const Complex ph = std::polar(1.0, 2 * std::numbers::pi * k / 64);
      const double e = coherent::two_mode_energy({f.alphas * ph, f.betas * std::conj(ph)}, p);
      phase_err = std::max(phase_err, std::abs(e - e0) / std::max(1.0, std::abs(e0)));
    }
  }
  out.pass = balanced_err <= 1e-8 && residual < 1e-12 && below_balanced == 0 && phase_err <= 1e-12 &&
             unbalanced > 0;
  out.detail = fmt("balanced rel error %.1e; %g unbalanced solutions, residual %.1e, %g below balanced",
                   balanced_err, unbalanced, residual, below_balanced);
  out.detail += fmt("; phase-orbit error %.1e", phase_err);
  return out;
}

Outcome determinism() {
  Outcome out;
  cli::Config c = cli::parse_config(R"({"method": "mf", "params": {"2V/U": 1.5, "eps/U": 0.1},
    "mf": {"n_random": 2}, "seed": 2718,
    "scan": {"x": {"name": "2J/U", "min": 0, "max": 1, "steps": 16},
             "y": {"name": "mu/U", "min": 0, "max": 3, "steps": 16}}})");
  std::vector<std::string> outputs;
  for (int w : {1, 2, 4, 7}) {
    c.workers = w;
    outputs.push_back(cli::run_scan(c).first);
  }
  cli::Config g = cli::parse_config(R"({"method": "coherent", "params": {"2J/U": 0.8, "2V/U": 1.5},
    "coherent": {"n_starts": 3}, "seed": 9,
    "scan": {"x": {"name": "mu/U", "min": 0, "max": 5, "steps": 12}}})");
  g.workers = 1;
  const std::string c1 = cli::run_scan(g).first;
  g.workers = 5;
  const std::string c5 = cli::run_scan(g).first;
  bool same = c1 == c5;
  for (const auto& o : outputs) same = same && o == outputs.front();
  out.pass = same;
  out.detail = same ? "MF 16x16 scan identical for 1, 2, 4, 7 workers; coherent scan identical for 1, 5"
                    : "CSV differs between worker counts";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "coherent boundary exact", 1, coherent_boundary},
      {2, "analytic coherent energies", 120, analytic_coherent_energies},
      {3, "atomic limit exact", 120, atomic_limit},
      {4, "perturbative boundary", 300, perturbative_boundary},
      {5, "insulator shrinkage with eps", 600, insulator_shrinkage},
      {6, "supersolid enhancement", 600, supersolid_enhancement},
      {7, "variational hierarchy", 600, variational_hierarchy},
      {8, "wick engine oracle", 120, wick_oracle},
      {9, "flow integrity", 300, flow_integrity},
      {10, "gradient checks", 60, gradient_checks},
      {11, "analysis oracles", 10, analysis_oracles},
      {12, "two-mode U(1)", 120, two_mode},
      {13, "determinism", 60, determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s [%2d] %s: %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit_seconds, in_time ? "" : " over time");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
