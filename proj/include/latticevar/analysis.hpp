#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace latticevar::analysis {

struct Curve {
  std::vector<double> x;  // strictly ascending
  std::vector<double> y;
  int size_label = 0;
};

void validate(const Curve& curve);

/// corr(L/2) / corr(L/4). Throws Error(degenerate) if |corr(L/4)| <= 1e-14.
double correlation_ratio(const std::function<double(int)>& corr, int sites);

/// (3 - phi4/phi2^2)/2. Throws Error(degenerate) unless phi2 > 0.
double binder_from_moments(double phi2, double phi4);

/// Modified Akima piecewise cubic (C1, reduced overshoot).
class Makima {
 public:
  explicit Makima(Curve curve);
  double operator()(double x) const;
  double lo() const { return curve_.x.front(); }
  double hi() const { return curve_.x.back(); }
  const Curve& curve() const { return curve_; }

 private:
  Curve curve_;
  std::vector<double> slopes_;
};

double makima_interpolate(const Curve& curve, double x);

/// Largest x with interpolated y <= zero_tol, located on a fine scan of the
/// interpolant and refined by bisection. Throws Error(no_crossing) unless the
/// curve has values on both sides of zero_tol.
double critical_mu_zero_threshold(const Curve& curve, double zero_tol = 1e-6);

/// Smallest x in the common range where the interpolants are equal.
/// Throws Error(no_crossing) if their difference never changes sign.
double crossing_point(const Curve& first, const Curve& second);

struct FssFit {
  double mu_inf = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double rms_residual = 0.0;
};

/// mu_c(L) = mu_inf + beta L^-eta, eta on a 1e-3 grid over [0.1, 4] with an
/// exact linear solve at each eta. Needs at least three distinct sizes.
FssFit fss_fit(const std::vector<std::pair<double, double>>& points);

struct BisectResult {
  double value = 0.0;
  int iterations = 0;
};

/// Bisection on a two-valued classifier until the bracket is <= tol wide;
/// returns the bracket midpoint. Throws Error(no_crossing) if both ends agree.
BisectResult boundary_bisect(const std::function<int(double)>& classifier, double lo, double hi,
                             double tol);

}  // namespace latticevar::analysis
