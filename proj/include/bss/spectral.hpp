#pragma once

#include <Eigen/Dense>
#include <string>

#include "bss/series.hpp"

namespace bss {

enum class Taper { hann, none };

std::string to_string(Taper taper);
/// "hann" or "none"; ConfigError otherwise.
Taper parse_taper(const std::string& name);

/// One-sided Welch density estimate.
struct PsdEstimate {
  Eigen::VectorXd freqs;
  Eigen::VectorXd density;
  long segment_len = 0;
  double overlap_fraction = 0.0;
  Taper taper = Taper::hann;
  long segments = 0;
  long fft_len = 0;
  double delta = 1.0;

  /// Frequency spacing 1 / (fft_len delta).
  double bin_width() const noexcept { return 1.0 / (static_cast<double>(fft_len) * delta); }
  /// Integral of the density over [0, Nyquist]; close to the series variance.
  double total_power() const;
};

/// Averaged tapered periodograms of mean-removed segments. Segments start
/// every segment_len (1 - overlap) samples, are zero padded to the next power
/// of two and normalised by delta / sum w^2; all bins except DC and Nyquist
/// are doubled. DomainError if fewer than 2 segments fit.
PsdEstimate welch_psd(const SeriesGrid& series, long segment_len, double overlap_fraction, Taper taper = Taper::hann);

struct SpectrumFit {
  double alpha = 0.0;
  double lambda = 0.0;
  double log_const = 0.0;
  double f_min = 0.0;
  double f_max = 0.0;
  /// Root mean square of the log residuals.
  double residual = 0.0;
  long bins = 0;
  int iterations = 0;
  bool alpha_in_range = true;
};

/// log S(f) = log_const - (1 + alpha) log(1 + (2 pi f / lambda)^2).
double log_spectral_model(double f, double alpha, double lambda, double log_const);

/// Unweighted least squares in log-log coordinates over f_min <= f <= f_max.
/// A grid over (alpha, log lambda) with log_const profiled out seeds a damped
/// Gauss-Newton refinement of all three parameters, stopped at relative step
/// 1e-6. f_min <= 0 selects the fourth nonzero bin. DomainError with fewer
/// than 20 bins, NumericError (reporting the best grid point) if the
/// refinement does not converge.
SpectrumFit fit_spectrum(const PsdEstimate& psd, double f_min, double f_max);

/// Least-squares slope of log density on log frequency over [f_lo, f_hi].
double loglog_slope(const PsdEstimate& psd, double f_lo, double f_hi);

}  // namespace bss
