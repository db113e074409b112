#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "latticevar/model.hpp"

using namespace latticevar;

namespace {

// Total J = eps = 0 energy of a Fock configuration on a periodic chain.
double config_energy(const std::vector<int>& n, const ModelParams& p) {
  double e = 0.0;
  const std::size_t l = n.size();
  for (std::size_t j = 0; j < l; ++j) {
    e += -p.mu * n[j] + 0.5 * p.u * n[j] * (n[j] - 1.0) + p.v * n[j] * n[(j + 1) % l];
  }
  return e;
}

double brute_force_min_l4(const ModelParams& p, int n_max) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> n(4);
  for (n[0] = 0; n[0] <= n_max; ++n[0])
    for (n[1] = 0; n[1] <= n_max; ++n[1])
      for (n[2] = 0; n[2] <= n_max; ++n[2])
        for (n[3] = 0; n[3] <= n_max; ++n[3]) best = std::min(best, config_energy(n, p));
  return best;
}

}  // namespace

TEST_CASE("validate accepts the domain boundary and names violations") {
  ModelParams p;
  CHECK_NOTHROW(validate(p, LatticeSpec{4, 3}));
  p.u = 0.0;
  CHECK_THROWS_WITH_AS(validate(p), "u must be positive", Error);
  CHECK_THROWS_WITH_AS(validate(LatticeSpec{5, 3}), "L must be even and >= 4", Error);
  CHECK_THROWS_AS(validate(LatticeSpec{2, 3}), Error);
  CHECK_THROWS_AS(validate(LatticeSpec{4, 0}), Error);
  ModelParams q;
  q.j = -0.1;
  CHECK_THROWS_WITH_AS(validate(q), "j must be nonnegative", Error);
  q = ModelParams{};
  q.eps = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate(q), Error);
}

TEST_CASE("from_ratios maps the dimensionless axes") {
  const ModelParams p = from_ratios(1.8, 0.8, 1.5, 0.2);
  CHECK(p.u == 1.0);
  CHECK(p.mu == 1.8);
  CHECK(p.j == doctest::Approx(0.4));
  CHECK(p.v == doctest::Approx(0.75));
  CHECK(p.eps == 0.2);
}

TEST_CASE("atomic occupations at tabulated points") {
  auto a = atomic_ground_occupations(from_ratios(1.8, 0, 1.5, 0));
  CHECK(a.n_odd == 2);
  CHECK(a.n_even == 0);
  CHECK(a.energy_per_pair == doctest::Approx(-2.6).epsilon(1e-14));

  a = atomic_ground_occupations(from_ratios(0.0, 0, 0.7, 0));
  CHECK(a.n_odd == 0);
  CHECK(a.n_even == 0);
  CHECK(a.energy_per_pair == 0.0);

  a = atomic_ground_occupations(from_ratios(0.5, 0, 0.5, 0));
  CHECK(a.n_odd == 1);
  CHECK(a.n_even == 0);
  const ModelParams p = from_ratios(0.5, 0, 0.5, 0);
  CHECK(2.0 * a.energy_per_pair == doctest::Approx(brute_force_min_l4(p, 3)).epsilon(1e-14));
}

TEST_CASE("atomic energy closed form") {
  ModelParams p = from_ratios(1.8, 0, 1.5, 0);
  CHECK(atomic_energy_per_pair(2, 0, p) == doctest::Approx(-2.6).epsilon(1e-14));
  CHECK(atomic_energy_per_pair(0, 0, p) == 0.0);
  p = from_ratios(1.0, 0, 0, 0);
  CHECK(atomic_energy_per_pair(1, 1, p) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK_THROWS_AS(atomic_energy_per_pair(-1, 0, p), Error);
}

TEST_CASE("2V = U is rejected as degenerate") {
  try {
    atomic_ground_occupations(from_ratios(1.0, 0, 1.0, 0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate);
  }
}

TEST_CASE("atomic occupations minimize the pair energy exhaustively") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mu(0.0, 5.0), two_v(0.0, 3.0);
  const int n_max = 8;
  for (int trial = 0; trial < 2000; ++trial) {
    const ModelParams p = from_ratios(mu(rng), 0, two_v(rng), 0);
    if (std::abs(2.0 * p.v - p.u) < 1e-9) continue;
    const auto a = atomic_ground_occupations(p);
    CHECK(a.n_odd >= a.n_even);
    double best = std::numeric_limits<double>::infinity();
    for (int no = 0; no <= n_max; ++no)
      for (int ne = 0; ne <= n_max; ++ne) best = std::min(best, atomic_energy_per_pair(no, ne, p));
    CHECK(a.energy_per_pair <= best + 1e-12);
    CHECK(atomic_energy_per_pair(a.n_even, a.n_odd, p) == a.energy_per_pair);
  }
}

TEST_CASE("atomic pair energy agrees with brute force over L = 4 Fock configurations") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mu(0.0, 3.0), two_v(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const ModelParams p = from_ratios(mu(rng), 0, two_v(rng), 0);
    if (std::abs(2.0 * p.v - p.u) < 1e-9) continue;
    const auto a = atomic_ground_occupations(p);
    CHECK(2.0 * a.energy_per_pair == doctest::Approx(brute_force_min_l4(p, 5)).epsilon(1e-12));
  }
}
