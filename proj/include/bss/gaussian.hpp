#pragma once

#include <Eigen/Dense>
#include <vector>

namespace bss {

/// m_p = E|U|^p for U ~ N(0, 1).
double abs_moment(double p);

/// Hermite expansion |x|^p - m_p = sum_{l >= 2} a_l He_l(x) in probabilists'
/// Hermite polynomials.
struct HermiteExpansion {
  double power = 0.0;
  int truncation = 0;
  /// a_l for l = 0..truncation; a_0 = a_1 = 0 and odd entries vanish.
  std::vector<double> coeffs;
  /// l! a_l^2, the contribution of order l to Var |U|^p.
  std::vector<double> energy;
  /// (m_{2p} - m_p^2) - sum_{l <= L} l! a_l^2.
  double tail_bound = 0.0;
  /// Node count of the final quadrature.
  int nodes = 0;
};

/// Hermite coefficients up to order L (even, >= 2).
///
/// E[(|U|^p - m_p) He_l(U)] is computed on the half line with generalized
/// Gauss-Laguerre quadrature in y = x^2/2, where the weight y^{(p-1)/2} e^{-y}
/// absorbs the kink of |x|^p at zero. The rule is exact for these integrands;
/// a second rule with 8 more nodes must agree to 1e-10 (NumericError
/// otherwise).
HermiteExpansion hermite_coeffs(double p, int truncation);

/// Covariance of two binomial difference filters of fBm, order k each, at
/// spacings `spacing_a` and `spacing_b`, with the second filter's end point
/// shifted by `lag` unit steps. Exact sum for short lags, binomial asymptotic
/// series for long ones (no cancellation of |j|^{2H} terms).
double fbm_filter_covariance(double hurst, int k, int spacing_a, int spacing_b, long lag);

/// Same quantity from the bilinear contraction of
/// gamma(s, t) = (|s|^{2H} + |t|^{2H} - |s - t|^{2H}) / 2 in extended
/// precision. Independent cross-check for fbm_filter_covariance.
double fbm_filter_covariance_contraction(double hurst, int k, int spacing_a, int spacing_b, long lag);

/// Lag-j correlation of k-th order fBm increments at unit spacing.
double rho_k(double hurst, int k, long j);

/// Correlation between a spacing-1 and a spacing-2 k-th order fBm increment
/// whose end points are j unit steps apart (j may be negative).
double rho_cross(double hurst, int k, long j);

/// Asymptotic covariance of (Vbar(p,k,1), Vbar(p,k,2)) for fBm, in units of
/// the normalized power variation per unit time.
struct LambdaMatrix {
  Eigen::Matrix2d entries = Eigen::Matrix2d::Zero();
  double power = 0.0;
  double hurst = 0.0;
  int order = 0;
  int truncation = 0;
  long max_lag = 0;
  /// Estimated contribution of lags beyond max_lag (already included).
  double lag_tail = 0.0;
  /// Hermite orders beyond `truncation` (already included in the diagonal).
  double hermite_tail = 0.0;

  double lambda11() const { return entries(0, 0); }
  double lambda12() const { return entries(0, 1); }
  double lambda22() const { return entries(1, 1); }
  /// (-1, 1) Lambda (-1, 1)^T.
  double contrast() const { return entries(0, 0) - 2.0 * entries(0, 1) + entries(1, 1); }
  bool positive_semidefinite(double tol = 1e-10) const;
};

/// Truncated Hermite/correlation series for Lambda_p. RegimeError when the
/// squared correlations are not summable (k = 1 with H >= 3/4).
LambdaMatrix lambda_matrix(double p, double hurst, int k, int truncation = 60, long max_lag = 100000);

}  // namespace bss
