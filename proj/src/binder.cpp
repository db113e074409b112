#include <array>

#include "latticevar/error.hpp"
#include "latticevar/gaussian.hpp"

namespace latticevar::gaussian {

// log <exp(t phi)> = -1/2 tr log(I - 2 C Sigma) + m^T C (I - 2 Sigma C)^{-1} m,
// C(t) = (cosh t - 1) I + sinh t S, over the formal normal-ordered Gaussian of
// (Re z, Im z). Expanded to fourth order in t.
PhiMoments phi_moments(const State& s) {
  validate(s);
  const int l = s.sites();
  if (l % 2 != 0) throw Error(ErrorCode::invalid_argument, "L must be even");
  const int n = 2 * l;
  const Eigen::VectorXcd alpha = amplitudes(s);
  const Eigen::MatrixXcd nm = normal_moments(s);
  const Eigen::MatrixXcd am = anomalous_moments(s);

  Eigen::MatrixXd sigma(n, n);
  sigma.topLeftCorner(l, l) = 0.5 * (nm + am).real();
  sigma.bottomRightCorner(l, l) = 0.5 * (nm - am).real();
  sigma.topRightCorner(l, l) = 0.5 * (am + nm).imag();
  sigma.bottomLeftCorner(l, l) = sigma.topRightCorner(l, l).transpose();
  Eigen::VectorXd mean(n);
  mean << alpha.real(), alpha.imag();

  Eigen::VectorXd stag(n);
  for (int j = 0; j < l; ++j) stag(j) = stag(l + j) = (j % 2 == 0) ? 1.0 : -1.0;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  // Taylor coefficients of C(t), diagonal.
  const std::array<Eigen::VectorXd, 5> c = {Eigen::VectorXd::Zero(n), stag, 0.5 * ones,
                                            stag / 6.0, ones / 24.0};

  std::array<Eigen::MatrixXd, 5> x;  // 2 C_k Sigma
  std::array<Eigen::MatrixXd, 5> y;  // 2 Sigma C_k
  for (int k = 1; k <= 4; ++k) {
    x[k] = 2.0 * c[k].asDiagonal() * sigma;
    y[k] = 2.0 * sigma * c[k].asDiagonal();
  }

  std::array<double, 5> coeff{};
  // Trace part: 1/2 sum_p tr(X^p)/p.
  std::array<Eigen::MatrixXd, 5> power;
  for (int k = 1; k <= 4; ++k) power[k] = x[k];
  for (int p = 1; p <= 4; ++p) {
    if (p > 1) {
      std::array<Eigen::MatrixXd, 5> next;
      for (int k = p; k <= 4; ++k) {
        next[k] = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i <= k - (p - 1); ++i) next[k].noalias() += x[i] * power[k - i];
      }
      power = std::move(next);
    }
    for (int k = p; k <= 4; ++k) coeff[k] += 0.5 * power[k].trace() / p;
  }
  // Mean part: r = (I - Y)^{-1} m as a series.
  std::array<Eigen::VectorXd, 5> r;
  r[0] = mean;
  for (int k = 1; k <= 4; ++k) {
    r[k] = Eigen::VectorXd::Zero(n);
    for (int i = 1; i <= k; ++i) r[k].noalias() += y[i] * r[k - i];
  }
  for (int k = 1; k <= 4; ++k) {
    for (int i = 1; i <= k; ++i) coeff[k] += mean.dot(c[i].cwiseProduct(r[k - i]));
  }

  const double k1 = coeff[1];
  const double k2 = 2.0 * coeff[2];
  const double k3 = 6.0 * coeff[3];
  const double k4 = 24.0 * coeff[4];
  PhiMoments out;
  out.m1 = k1;
  out.m2 = k2 + k1 * k1;
  out.m4 = k4 + 4.0 * k3 * k1 + 3.0 * k2 * k2 + 6.0 * k2 * k1 * k1 + k1 * k1 * k1 * k1;
  return out;
}

}  // namespace latticevar::gaussian
