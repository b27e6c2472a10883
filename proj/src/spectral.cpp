#include "bss/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "bss/errors.hpp"
#include "bss/stats.hpp"

namespace bss {
namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

long next_pow2(long x) {
  long m = 1;
  while (m < x) m <<= 1;
  return m;
}

struct Bins {
  std::vector<double> f, y;
};

Bins select_bins(const PsdEstimate& psd, double f_min, double f_max) {
  Bins b;
  for (Eigen::Index i = 0; i < psd.freqs.size(); ++i) {
    const double f = psd.freqs(i);
    if (f > 0.0 && f >= f_min && f <= f_max && psd.density(i) > 0.0) {
      b.f.push_back(f);
      b.y.push_back(std::log(psd.density(i)));
    }
  }
  return b;
}

// log(1 + (2 pi f / lambda)^2) for lambda = exp(mu), and its mu-derivative.
inline double corner_term(double f, double mu) {
  const double q = 2.0 * std::numbers::pi * f * std::exp(-mu);
  return std::log1p(q * q);
}
inline double corner_slope(double f, double mu) {
  const double q = 2.0 * std::numbers::pi * f * std::exp(-mu);
  return -2.0 * q * q / (1.0 + q * q);
}

// Residual sum of squares with log_const profiled out; returns the constant too.
double profiled_sse(const Bins& b, double alpha, double mu, double& log_const) {
  CompensatedSum s;
  std::vector<double> shifted(b.f.size());
  for (std::size_t i = 0; i < b.f.size(); ++i) {
    shifted[i] = b.y[i] + (1.0 + alpha) * corner_term(b.f[i], mu);
    s.add(shifted[i]);
  }
  log_const = s.value() / static_cast<double>(b.f.size());
  double sse = 0.0;
  for (double v : shifted) sse += (v - log_const) * (v - log_const);
  return sse;
}

double sse_at(const Bins& b, const Eigen::Vector3d& theta) {
  double sse = 0.0;
  for (std::size_t i = 0; i < b.f.size(); ++i) {
    const double r = b.y[i] - theta(2) + (1.0 + theta(0)) * corner_term(b.f[i], theta(1));
    sse += r * r;
  }
  return sse;
}

}  // namespace

std::string to_string(Taper taper) { return taper == Taper::hann ? "hann" : "none"; }

Taper parse_taper(const std::string& name) {
  if (name == "hann" || name == "hanning") return Taper::hann;
  if (name == "none") return Taper::none;
  throw ConfigError("unknown taper '" + name + "' (expected hann or none)");
}

double PsdEstimate::total_power() const {
  CompensatedSum s;
  for (Eigen::Index i = 0; i < density.size(); ++i) s.add(density(i));
  return s.value() * bin_width();
}

PsdEstimate welch_psd(const SeriesGrid& series, long segment_len, double overlap_fraction, Taper taper) {
  if (segment_len < 2) throw DomainError("segment length must be >= 2");
  if (!(overlap_fraction >= 0.0 && overlap_fraction <= 0.9)) throw DomainError("overlap fraction must lie in [0, 0.9]");
  const long n = static_cast<long>(series.size());
  if (segment_len > n) throw DomainError("segment length exceeds the series length");
  const long step = std::max(1L, std::lround(static_cast<double>(segment_len) * (1.0 - overlap_fraction)));
  const long segments = 1 + (n - segment_len) / step;
  if (segments < 2) throw DomainError("Welch estimate needs at least 2 segments; shorten the segments");

  std::vector<double> window(static_cast<std::size_t>(segment_len), 1.0);
  if (taper == Taper::hann)
    for (long i = 0; i < segment_len; ++i)
      window[static_cast<std::size_t>(i)] =
          0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(segment_len - 1)));
  double wsq = 0.0;
  for (double w : window) wsq += w * w;

  const long nfft = next_pow2(segment_len);
  const long half = nfft / 2;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(half + 1);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(nfft)), out;
  for (long s = 0; s < segments; ++s) {
    const long start = s * step;
    const double m = series.values.segment(start, segment_len).mean();
    std::fill(buf.begin(), buf.end(), 0.0);
    for (long i = 0; i < segment_len; ++i)
      buf[static_cast<std::size_t>(i)] = window[static_cast<std::size_t>(i)] * (series.values(start + i) - m);
    fft_engine().fwd(out, buf);
    for (long j = 0; j <= half; ++j) acc(j) += std::norm(out[static_cast<std::size_t>(j)]);
  }

  PsdEstimate psd;
  psd.segment_len = segment_len;
  psd.overlap_fraction = overlap_fraction;
  psd.taper = taper;
  psd.segments = segments;
  psd.fft_len = nfft;
  psd.delta = series.delta;
  psd.freqs.resize(half + 1);
  psd.density.resize(half + 1);
  const double norm = series.delta / (wsq * static_cast<double>(segments));
  for (long j = 0; j <= half; ++j) {
    psd.freqs(j) = static_cast<double>(j) / (static_cast<double>(nfft) * series.delta);
    psd.density(j) = acc(j) * norm * ((j == 0 || j == half) ? 1.0 : 2.0);
  }
  return psd;
}

double log_spectral_model(double f, double alpha, double lambda, double log_const) {
  return log_const - (1.0 + alpha) * corner_term(f, std::log(lambda));
}

SpectrumFit fit_spectrum(const PsdEstimate& psd, double f_min, double f_max) {
  if (f_min <= 0.0) f_min = psd.freqs.size() > 4 ? psd.freqs(4) : 0.0;
  if (!(f_max > f_min)) throw DomainError("fit band needs f_max > f_min");
  const Bins b = select_bins(psd, f_min, f_max);
  if (b.f.size() < 20) {
    std::ostringstream msg;
    msg << "fit band [" << f_min << ", " << f_max << "] holds " << b.f.size() << " bins; at least 20 are needed";
    throw DomainError(msg.str());
  }

  // Coarse grid: corner frequencies from well below to well above the band.
  const double mu_lo = std::log(2.0 * std::numbers::pi * b.f.front() / 30.0);
  const double mu_hi = std::log(2.0 * std::numbers::pi * b.f.back() * 30.0);
  Eigen::Vector3d best(0.0, 0.0, 0.0);
  double best_sse = std::numeric_limits<double>::infinity();
  constexpr int kAlphaSteps = 99, kMuSteps = 120;
  for (int i = 0; i < kAlphaSteps; ++i) {
    const double alpha = -0.49 + 0.98 * i / (kAlphaSteps - 1);
    for (int j = 0; j < kMuSteps; ++j) {
      const double mu = mu_lo + (mu_hi - mu_lo) * j / (kMuSteps - 1);
      double c = 0.0;
      const double sse = profiled_sse(b, alpha, mu, c);
      if (sse < best_sse) {
        best_sse = sse;
        best = Eigen::Vector3d(alpha, mu, c);
      }
    }
  }

  // Levenberg-Marquardt on (alpha, log lambda, log_const).
  Eigen::Vector3d theta = best;
  double sse = best_sse;
  double damping = 1e-3;
  int it = 0;
  bool converged = false;
  const std::size_t n = b.f.size();
  for (; it < 500 && !converged; ++it) {
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double l = corner_term(b.f[i], theta(1));
      const double r = b.y[i] - theta(2) + (1.0 + theta(0)) * l;
      const Eigen::Vector3d jac(l, (1.0 + theta(0)) * corner_slope(b.f[i], theta(1)), -1.0);
      jtj += jac * jac.transpose();
      jtr += jac * r;
    }
    for (;;) {
      Eigen::Matrix3d a = jtj;
      a.diagonal() += damping * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::Vector3d step = a.ldlt().solve(-jtr);
      const Eigen::Vector3d trial = theta + step;
      const double trial_sse = sse_at(b, trial);
      const double rel = (step.array().abs() / theta.array().abs().max(1e-3)).maxCoeff();
      if (trial_sse <= sse) {
        theta = trial;
        sse = trial_sse;
        damping = std::max(damping / 10.0, 1e-12);
        converged = rel < 1e-6;
        break;
      }
      damping *= 10.0;
      if (damping > 1e12 || rel < 1e-12) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "spectral fit did not converge; best grid point alpha = " << best(0) << ", lambda = " << std::exp(best(1));
    throw NumericError(msg.str(), sse);
  }

  SpectrumFit fit;
  fit.alpha = theta(0);
  fit.lambda = std::exp(theta(1));
  fit.log_const = theta(2);
  fit.f_min = f_min;
  fit.f_max = f_max;
  fit.bins = static_cast<long>(n);
  fit.residual = std::sqrt(sse / static_cast<double>(n));
  fit.iterations = it;
  fit.alpha_in_range = fit.alpha > -0.5 && fit.alpha < 0.5;
  return fit;
}

double loglog_slope(const PsdEstimate& psd, double f_lo, double f_hi) {
  const Bins b = select_bins(psd, f_lo, f_hi);
  if (b.f.size() < 3) throw DomainError("slope band holds fewer than 3 bins");
  std::vector<double> lf(b.f.size());
  for (std::size_t i = 0; i < b.f.size(); ++i) lf[i] = std::log(b.f[i]);
  return ols_slope(lf, b.y);
}

}  // namespace bss
