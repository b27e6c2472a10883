#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bss/gaussian.hpp"
#include "bss/series.hpp"

namespace bss {

/// h_p(x) = log2(x) / p - 1/2, the inverse of alpha -> 2^{(2 alpha + 1) p / 2}.
double h_p(double x, double p);
double h_p_prime(double x, double p);

struct EstimateDiagnostics {
  long count_v1 = 0;
  long count_v2 = 0;
  /// V(X, p, 2, 1) and V(X, 2p, 2, 1), the studentization proxies.
  double v_p = 0.0;
  double v_2p = 0.0;
  /// Plain intervals: Lambda_p at the plug-in Hurst index.
  std::optional<LambdaMatrix> lambda;
  double hurst_plugin = 0.0;
  bool hurst_clamped = false;
  /// Gapped intervals: variance factor multiplying u V(2p) / m_{2p}.
  double variance_factor = 0.0;
  /// Gapped intervals: the standard error without the gap factor u and with
  /// factor 4, as the studentization is sometimes written.
  double std_error_unscaled = 0.0;
  /// Applicable alpha range of the interval, checked against alpha_hat.
  double regime_low = -0.5;
  double regime_high = 0.5;
};

struct EstimateReport {
  /// "point", "plain" or "gapped".
  std::string method = "point";
  double p = 0.0;
  double delta = 0.0;
  double horizon = 0.0;
  std::optional<int> gap;
  double cof = 0.0;
  double alpha_hat = 0.0;
  double std_error = 0.0;
  double level = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// False when alpha_hat lies outside the range where the interval is
  /// justified, or when the interval reaches -1/2, 0 or 1/2.
  bool regime_ok = true;
  EstimateDiagnostics diagnostics;
  std::vector<std::string> warnings;
};

/// V(X, p, 2, 2) / V(X, p, 2, 1). DegenerateInputError when the denominator vanishes.
double cof(const SeriesGrid& series, double p);

/// alpha_hat = h_p(COF); warns when the value is outside (-1/2, 1/2) \ {0}.
EstimateReport alpha_hat(const SeriesGrid& series, double p);

/// Studentized plain interval with Lambda_p evaluated at H = alpha_hat + 1/2
/// (clamped into [0.02, 0.98] with a warning).
EstimateReport cof_ci(const SeriesGrid& series, double p, double level);
/// Same with a caller-supplied Lambda_p.
EstimateReport cof_ci(const SeriesGrid& series, double p, double level, const LambdaMatrix& lambda);

struct GapChoice {
  int u = 0;
  double kappa = 0.0;
  /// Admissible kappa interval (max(0, 4 alpha - 1), 1).
  double kappa_low = 0.0;
  double kappa_high = 1.0;
};

/// u = max(ceil(delta^{-kappa}), ceil((4k + 2) / 3)) with k = 2. ConfigError if
/// kappa is outside the admissible interval or u delta >= horizon / 10.
GapChoice choose_gap(double delta, double alpha_prelim, double kappa, double horizon);

/// Gapped estimator h_p(V(X,p,2,u,2) / V(X,p,2,u,1)) and its interval, valid
/// on the whole range (-1/2, 0) u (0, 1/2).
EstimateReport gapped_alpha_ci(const SeriesGrid& series, double p, int u, double level);

/// Two-stage procedure: plain alpha_hat as preliminary value, then
/// choose_gap and gapped_alpha_ci.
EstimateReport gapped_alpha_ci_auto(const SeriesGrid& series, double p, double kappa, double level);

struct ScanRow {
  double p = 0.0;
  long lag_multiplier = 1;
  /// NaN when the thinned series is too short or degenerate.
  double alpha_hat = 0.0;
  long count = 0;
  bool sufficient = true;
};

struct ScanTable {
  std::vector<ScanRow> rows;
  double delta = 0.0;
  /// Kolmogorov's 5/3 law corresponds to alpha = -1/6.
  double reference_alpha = -1.0 / 6.0;
  std::string thinning = "every m-th observation starting at index 0";
};

/// alpha_hat(p, m delta) on the series thinned to every m-th point.
ScanTable alpha_scan(const SeriesGrid& series, const std::vector<double>& powers, const std::vector<long>& multipliers);

/// Every m-th observation starting at index 0.
SeriesGrid thin(const SeriesGrid& series, long m);

}  // namespace bss
