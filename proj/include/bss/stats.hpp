#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace bss {

/// Neumaier's compensated summation. Adding the same values in the same
/// order always yields the same bits, which the power-variation streaming
/// contract relies on.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      compensation_ += (sum_ - t) + x;
    else
      compensation_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against erfc, good to about 1e-15 relative on (0, 1).
double normal_quantile(double prob);

/// Two-sided quantile z with P(|U| <= z) = level.
double two_sided_z(double level);

/// Kolmogorov-Smirnov distance between the empirical law of `sample` and N(0,1).
double ks_distance_normal(std::span<const double> sample);

double mean(std::span<const double> x) noexcept;

/// Unbiased sample variance (n - 1 denominator).
double sample_variance(std::span<const double> x) noexcept;

/// Lag-1 sample autocorrelation about the sample mean.
double lag_autocorrelation(std::span<const double> x, std::size_t lag) noexcept;

/// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y) noexcept;

}  // namespace bss
