#include "latticevar/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "latticevar/error.hpp"

namespace latticevar::analysis {

namespace {

constexpr int kSubsamples = 64;

double bisect_root(const std::function<double(double)>& f, double a, double b, double fa) {
  for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

std::vector<double> sample_grid(const std::vector<double>& knots, double lo, double hi) {
  std::vector<double> grid;
  std::vector<double> cuts{lo};
  for (double k : knots) {
    if (k > lo && k < hi) cuts.push_back(k);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    for (int s = 0; s < kSubsamples; ++s) {
      grid.push_back(cuts[i] + (cuts[i + 1] - cuts[i]) * s / kSubsamples);
    }
  }
  grid.push_back(hi);
  return grid;
}

}  // namespace

void validate(const Curve& c) {
  if (c.x.size() != c.y.size()) throw Error(ErrorCode::invalid_argument, "curve x and y differ in length");
  if (c.x.size() < 4) throw Error(ErrorCode::invalid_argument, "curve needs at least 4 points");
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i])) {
      throw Error(ErrorCode::invalid_argument, "curve values must be finite");
    }
    if (i > 0 && !(c.x[i] > c.x[i - 1])) {
      throw Error(ErrorCode::invalid_argument, "curve x must be strictly ascending");
    }
  }
}

double correlation_ratio(const std::function<double(int)>& corr, int sites) {
  if (sites < 4 || sites % 4 != 0) {
    throw Error(ErrorCode::invalid_argument, "L must be a positive multiple of 4");
  }
  const double denom = corr(sites / 4);
  if (!(std::abs(denom) > 1e-14)) {
    throw Error(ErrorCode::degenerate, "correlation at L/4 vanishes");
  }
  return corr(sites / 2) / denom;
}

double binder_from_moments(double phi2, double phi4) {
  if (!(phi2 > 0.0)) throw Error(ErrorCode::degenerate, "<phi^2> must be positive");
  return 0.5 * (3.0 - phi4 / (phi2 * phi2));
}

Makima::Makima(Curve curve) : curve_(std::move(curve)) {
  validate(curve_);
  const auto& x = curve_.x;
  const auto& y = curve_.y;
  const std::size_t n = x.size();
  // delta[k + 2] holds the secant slope of interval k, k = -2 .. n.
  std::vector<double> delta(n + 3);
  for (std::size_t k = 0; k + 1 < n; ++k) delta[k + 2] = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
  delta[1] = 2.0 * delta[2] - delta[3];
  delta[0] = 2.0 * delta[1] - delta[2];
  delta[n + 1] = 2.0 * delta[n] - delta[n - 1];
  delta[n + 2] = 2.0 * delta[n + 1] - delta[n];
  slopes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dm2 = delta[i];
    const double dm1 = delta[i + 1];
    const double d0 = delta[i + 2];
    const double dp1 = delta[i + 3];
    const double w1 = std::abs(dp1 - d0) + 0.5 * std::abs(dp1 + d0);
    const double w2 = std::abs(dm1 - dm2) + 0.5 * std::abs(dm1 + dm2);
    slopes_[i] = (w1 + w2 == 0.0) ? 0.0 : (w1 * dm1 + w2 * d0) / (w1 + w2);
  }
}

double Makima::operator()(double q) const {
  const auto& x = curve_.x;
  const auto& y = curve_.y;
  if (!(q >= x.front() && q <= x.back())) {
    throw Error(ErrorCode::invalid_argument, "query outside the interpolation range");
  }
  std::size_t k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), q) - x.begin());
  if (k == x.size()) return y.back();
  k -= 1;
  const double h = x[k + 1] - x[k];
  const double t = (q - x[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y[k] + (t3 - 2 * t2 + t) * h * slopes_[k] +
         (-2 * t3 + 3 * t2) * y[k + 1] + (t3 - t2) * h * slopes_[k + 1];
}

double makima_interpolate(const Curve& curve, double x) { return Makima(curve)(x); }

double critical_mu_zero_threshold(const Curve& curve, double zero_tol) {
  const Makima f(curve);
  const auto g = [&](double x) { return f(x) - zero_tol; };
  const std::vector<double> grid = sample_grid(curve.x, f.lo(), f.hi());
  bool any_low = false;
  bool any_high = false;
  for (double x : grid) (g(x) <= 0.0 ? any_low : any_high) = true;
  if (!any_low || !any_high) {
    throw Error(ErrorCode::no_crossing, "curve does not cross the zero threshold");
  }
  for (std::size_t i = grid.size(); i-- > 0;) {
    if (g(grid[i]) <= 0.0) {
      if (i + 1 == grid.size()) return grid[i];
      // g(grid[i]) <= 0 < g(grid[i+1]); keep the invariant at the left end.
      double a = grid[i];
      double b = grid[i + 1];
      for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        (g(m) <= 0.0 ? a : b) = m;
      }
      return a;
    }
  }
  throw Error(ErrorCode::no_crossing, "curve does not cross the zero threshold");
}

double crossing_point(const Curve& first, const Curve& second) {
  const Makima f(first);
  const Makima g(second);
  const double lo = std::max(f.lo(), g.lo());
  const double hi = std::min(f.hi(), g.hi());
  if (!(lo < hi)) throw Error(ErrorCode::no_crossing, "curves do not overlap");
  std::vector<double> knots = first.x;
  knots.insert(knots.end(), second.x.begin(), second.x.end());
  const std::function<double(double)> diff = [&](double x) { return f(x) - g(x); };
  const std::vector<double> grid = sample_grid(knots, lo, hi);
  double last_x = 0.0;
  double last_v = 0.0;
  bool have_last = false;
  for (double x : grid) {
    const double v = diff(x);
    if (v == 0.0) continue;
    if (have_last && (v < 0.0) != (last_v < 0.0)) return bisect_root(diff, last_x, x, last_v);
    last_x = x;
    last_v = v;
    have_last = true;
  }
  throw Error(ErrorCode::no_crossing, "curve difference never changes sign");
}

FssFit fss_fit(const std::vector<std::pair<double, double>>& points) {
  std::vector<double> sizes;
  for (const auto& [l, mu] : points) {
    if (!(l > 0.0) || !std::isfinite(mu)) {
      throw Error(ErrorCode::invalid_argument, "sizes must be positive and values finite");
    }
    sizes.push_back(l);
  }
  std::sort(sizes.begin(), sizes.end());
  const auto distinct = std::unique(sizes.begin(), sizes.end()) - sizes.begin();
  if (distinct < 3) throw Error(ErrorCode::invalid_argument, "fit needs at least 3 distinct sizes");

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = points[i].second;
  FssFit best;
  double best_ss = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 3900; ++k) {
    const double eta = (100 + k) / 1000.0;
    Eigen::MatrixXd a(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, 0) = 1.0;
      a(i, 1) = std::pow(points[i].first, -eta);
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 2) throw Error(ErrorCode::degenerate, "rank-deficient power-law fit");
    const Eigen::Vector2d coef = qr.solve(rhs);
    const double ss = (a * coef - rhs).squaredNorm();
    if (ss < best_ss) {
      best_ss = ss;
      best = {coef(0), coef(1), eta, std::sqrt(ss / static_cast<double>(n))};
    }
  }
  return best;
}

BisectResult boundary_bisect(const std::function<int(double)>& classifier, double lo, double hi,
                             double tol) {
  if (!(lo < hi) || !(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "need lo < hi and tol > 0");
  const int left = classifier(lo);
  if (left == classifier(hi)) {
    throw Error(ErrorCode::no_crossing, "classifier agrees at both ends of the bracket");
  }
  BisectResult out;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (classifier(mid) == left ? lo : hi) = mid;
    ++out.iterations;
  }
  out.value = 0.5 * (lo + hi);
  return out;
}

}  // namespace latticevar::analysis
