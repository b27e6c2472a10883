#include "bss/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bss/errors.hpp"
#include "bss/stats.hpp"
#include "bss/variation.hpp"

namespace bss {
namespace {

constexpr double kHurstFloor = 0.02;
constexpr double kHurstCeil = 0.98;

struct CofParts {
  PowerVariationResult v1, v2;
  double ratio = 0.0;
};

CofParts cof_parts(const SeriesGrid& series, double p) {
  CofParts c;
  c.v1 = power_variation(series, p, 2, 1);
  c.v2 = power_variation(series, p, 2, 2);
  if (!(c.v1.raw > 0.0)) throw DegenerateInputError("COF undefined: V(X, p, 2, 1) is zero (constant or affine series)");
  if (!(c.v2.raw > 0.0)) throw DegenerateInputError("COF undefined: V(X, p, 2, 2) is zero");
  c.ratio = c.v2.raw / c.v1.raw;
  return c;
}

std::string fmt(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

void check_alpha_range(EstimateReport& r) {
  if (!(r.alpha_hat > -0.5 && r.alpha_hat < 0.5) || r.alpha_hat == 0.0)
    r.warnings.push_back("alpha_hat = " + fmt(r.alpha_hat) +
                         " is outside the model range (-1/2, 0) u (0, 1/2); the estimate is not interpretable");
}

void finish_interval(EstimateReport& r, double z) {
  r.ci_low = r.alpha_hat - z * r.std_error;
  r.ci_high = r.alpha_hat + z * r.std_error;
  const auto& d = r.diagnostics;
  const bool inside = r.alpha_hat > d.regime_low && r.alpha_hat < d.regime_high && r.alpha_hat != 0.0;
  if (!inside) {
    r.warnings.push_back("invalid regime: alpha_hat = " + fmt(r.alpha_hat) + " outside (" + fmt(d.regime_low) + ", " +
                         fmt(d.regime_high) + ") \\ {0} where the " + r.method + " interval is justified");
  }
  // An interval reaching -1/2, 0 or 1/2 cannot tell the data from the
  // excluded boundary cases (white noise, semimartingale, non-rough paths).
  bool boundary = false;
  for (double b : {-0.5, 0.0, 0.5}) boundary = boundary || (r.ci_low <= b && b <= r.ci_high);
  if (boundary)
    r.warnings.push_back("interval [" + fmt(r.ci_low) + ", " + fmt(r.ci_high) +
                         "] reaches a boundary of the model range (-1/2, 0, 1/2)");
  r.regime_ok = r.regime_ok && inside && !boundary;
}

}  // namespace

double h_p(double x, double p) {
  if (!(x > 0.0)) throw DomainError("h_p requires a positive argument");
  if (!(p > 0.0)) throw DomainError("power p must be positive");
  return std::log2(x) / p - 0.5;
}

double h_p_prime(double x, double p) {
  if (!(x > 0.0)) throw DomainError("h_p requires a positive argument");
  if (!(p > 0.0)) throw DomainError("power p must be positive");
  return 1.0 / (p * x * std::numbers::ln2);
}

double cof(const SeriesGrid& series, double p) { return cof_parts(series, p).ratio; }

EstimateReport alpha_hat(const SeriesGrid& series, double p) {
  const CofParts c = cof_parts(series, p);
  EstimateReport r;
  r.method = "point";
  r.p = p;
  r.delta = series.delta;
  r.horizon = series.horizon();
  r.cof = c.ratio;
  r.alpha_hat = h_p(c.ratio, p);
  r.ci_low = r.ci_high = r.alpha_hat;
  r.diagnostics.count_v1 = c.v1.count;
  r.diagnostics.count_v2 = c.v2.count;
  r.diagnostics.v_p = c.v1.raw;
  check_alpha_range(r);
  return r;
}

namespace {

EstimateReport plain_interval(const SeriesGrid& series, double p, double level, const LambdaMatrix* given) {
  const double z = two_sided_z(level);
  EstimateReport r = alpha_hat(series, p);
  r.method = "plain";
  r.level = level;
  auto& d = r.diagnostics;
  d.v_2p = power_variation(series, 2.0 * p, 2, 1).raw;

  if (p >= 2.0) {
    d.regime_low = -0.5;
    d.regime_high = 0.25;
  } else if (p > 0.5) {
    d.regime_low = -0.5;
    d.regime_high = (p - 1.0) / (2.0 * p);
  } else {
    d.regime_low = d.regime_high = 0.0;
    r.regime_ok = false;
    r.warnings.push_back("plain interval needs p > 1/2");
  }

  if (given) {
    d.lambda = *given;
    d.hurst_plugin = given->hurst;
  } else {
    const double raw_h = r.alpha_hat + 0.5;
    d.hurst_plugin = std::clamp(raw_h, kHurstFloor, kHurstCeil);
    d.hurst_clamped = d.hurst_plugin != raw_h;
    if (d.hurst_clamped)
      r.warnings.push_back("plug-in Hurst index " + fmt(raw_h) + " clamped to " + fmt(d.hurst_plugin));
    d.lambda = lambda_matrix(p, d.hurst_plugin, 2);
  }
  const double contrast = d.lambda->contrast();
  if (!(contrast > 0.0)) throw NumericError("Lambda contrast (-1, 1) Lambda (-1, 1)^T is not positive", contrast);
  const double scale = std::abs(h_p_prime(r.cof, p)) * r.cof;
  r.std_error = scale * std::sqrt(d.v_2p * contrast / abs_moment(2.0 * p)) / d.v_p;
  finish_interval(r, z);
  return r;
}

}  // namespace

EstimateReport cof_ci(const SeriesGrid& series, double p, double level) {
  return plain_interval(series, p, level, nullptr);
}

EstimateReport cof_ci(const SeriesGrid& series, double p, double level, const LambdaMatrix& lambda) {
  return plain_interval(series, p, level, &lambda);
}

GapChoice choose_gap(double delta, double alpha_prelim, double kappa, double horizon) {
  if (!(delta > 0.0)) throw DomainError("grid step must be positive");
  GapChoice g;
  g.kappa = kappa;
  g.kappa_low = std::max(0.0, 4.0 * alpha_prelim - 1.0);
  g.kappa_high = 1.0;
  if (!(kappa > g.kappa_low && kappa < g.kappa_high)) {
    std::ostringstream msg;
    msg << "kappa = " << kappa << " is not admissible for alpha = " << alpha_prelim << "; choose kappa in ("
        << g.kappa_low << ", 1)";
    throw ConfigError(msg.str());
  }
  const double raw = std::ceil(std::pow(delta, -kappa) - 1e-9);
  g.u = std::max(static_cast<int>(raw), FilterSpec::min_gap(2));
  if (!(static_cast<double>(g.u) * delta < horizon / 10.0)) {
    std::ostringstream msg;
    msg << "gap u = " << g.u << " spans " << g.u * delta << " time units, not below a tenth of the horizon " << horizon
        << "; use a smaller kappa or a longer series";
    throw ConfigError(msg.str());
  }
  return g;
}

EstimateReport gapped_alpha_ci(const SeriesGrid& series, double p, int u, double level) {
  const double z = two_sided_z(level);
  const PowerVariationResult g1 = gapped_pv(series, p, 2, u, 1);
  const PowerVariationResult g2 = gapped_pv(series, p, 2, u, 2);
  if (!(g1.raw > 0.0) || !(g2.raw > 0.0))
    throw DegenerateInputError("gapped COF undefined: a gapped power variation is zero");

  EstimateReport r;
  r.method = "gapped";
  r.p = p;
  r.delta = series.delta;
  r.horizon = series.horizon();
  r.gap = u;
  r.level = level;
  r.cof = g2.raw / g1.raw;
  r.alpha_hat = h_p(r.cof, p);
  check_alpha_range(r);

  auto& d = r.diagnostics;
  d.count_v1 = g1.count;
  d.count_v2 = g2.count;
  d.v_p = power_variation(series, p, 2, 1).raw;
  d.v_2p = power_variation(series, 2.0 * p, 2, 1).raw;
  if (!(d.v_p > 0.0)) throw DegenerateInputError("V(X, p, 2, 1) is zero (constant or affine series)");
  d.regime_low = -0.5;
  d.regime_high = 0.5;
  if (p < 2.0) {
    r.regime_ok = false;
    r.warnings.push_back("gapped interval is justified for p >= 2 only");
  }
  const double mp = abs_moment(p), m2p = abs_moment(2.0 * p);
  // The two gapped sums are asymptotically independent with variance
  // u delta (m_{2p} - m_p^2) int |sigma|^{2p} each, so their difference
  // carries twice that.
  d.variance_factor = 2.0 * (1.0 - mp * mp / m2p);
  const double scale = std::abs(h_p_prime(r.cof, p)) * r.cof;
  r.std_error = scale * std::sqrt(d.variance_factor * u * d.v_2p) / d.v_p;
  d.std_error_unscaled = scale * std::sqrt(4.0 * (1.0 - mp * mp / m2p) * d.v_2p) / d.v_p;
  finish_interval(r, z);
  return r;
}

EstimateReport gapped_alpha_ci_auto(const SeriesGrid& series, double p, double kappa, double level) {
  const EstimateReport prelim = alpha_hat(series, p);
  const GapChoice g = choose_gap(series.delta, prelim.alpha_hat, kappa, series.horizon());
  EstimateReport r = gapped_alpha_ci(series, p, g.u, level);
  r.warnings.insert(r.warnings.begin(), "gap chosen from preliminary alpha_hat = " + fmt(prelim.alpha_hat) +
                                            " with kappa = " + fmt(kappa));
  return r;
}

SeriesGrid thin(const SeriesGrid& series, long m) {
  if (m < 1) throw DomainError("lag multiplier must be >= 1");
  SeriesGrid out;
  const Eigen::Index n = (series.size() + m - 1) / m;
  out.values = Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<>>(series.values.data(), n,
                                                                          Eigen::InnerStride<>(m));
  out.delta = series.delta * static_cast<double>(m);
  out.origin = series.origin;
  out.meta = series.meta;
  return out;
}

ScanTable alpha_scan(const SeriesGrid& series, const std::vector<double>& powers, const std::vector<long>& multipliers) {
  ScanTable table;
  table.delta = series.delta;
  for (double p : powers) {
    for (long m : multipliers) {
      if (m < 1) throw DomainError("lag multipliers must be >= 1");
      ScanRow row;
      row.p = p;
      row.lag_multiplier = m;
      if (series.size() <= 4 * m * 2) {
        row.sufficient = false;
        row.alpha_hat = std::nan("");
      } else {
        const SeriesGrid thinned = thin(series, m);
        try {
          const EstimateReport e = alpha_hat(thinned, p);
          row.alpha_hat = e.alpha_hat;
          row.count = e.diagnostics.count_v1;
        } catch (const DataError&) {
          row.sufficient = false;
          row.alpha_hat = std::nan("");
        }
      }
      table.rows.push_back(row);
    }
  }
  return table;
}

}  // namespace bss
