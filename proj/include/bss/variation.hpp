#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "bss/errors.hpp"
#include "bss/kernel.hpp"
#include "bss/series.hpp"
#include "bss/stats.hpp"

namespace bss {

/// Which increments enter a power variation: k-th order differences at
/// spacing v, optionally keeping only every u-th one.
struct FilterSpec {
  int k = 2;
  int v = 1;
  std::optional<int> gap;

  /// Smallest admissible gap, ceil((4k + 2) / 3).
  static int min_gap(int k) noexcept { return (4 * k + 2 + 2) / 3; }
  /// DomainError on k < 1, v outside {1, 2} or a gap below min_gap(k).
  void validate() const;
};

struct PowerVariationResult {
  double p = 0.0;
  FilterSpec filter;
  /// V, sum of |increment|^p.
  double raw = 0.0;
  /// scale * tau^{-p} * raw; NaN when no tau was supplied.
  double normalized = std::nan("");
  double tau_used = std::nan("");
  /// delta for plain variations, u * delta for gapped ones.
  double scale = 0.0;
  long count = 0;
  /// Windows that would have reached past the last observation and were dropped.
  long dropped = 0;
};

namespace detail {

inline void check_power(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("power p must be positive and finite");
}

inline void check_filter_length(Eigen::Index size, int k, int v) {
  if (k < 1) throw DomainError("difference order k must be >= 1");
  if (v < 1) throw DomainError("frequency multiplier v must be >= 1");
  if (size <= static_cast<Eigen::Index>(v) * k)
    throw DomainError("series too short: need more than v*k = " + std::to_string(v * k) + " observations");
}

}  // namespace detail

/// Increment sum_j w_j x[i - v j] with binomial weights, accumulated in the
/// order j = 0..k. Every power variation routine goes through this.
template <typename Derived>
double difference_at(const Eigen::DenseBase<Derived>& x, const std::vector<double>& w, Eigen::Index i, int v) {
  double d = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) d += w[j] * x.derived().coeff(i - static_cast<Eigen::Index>(v * j));
  return d;
}

/// Differences Delta_{i,k}^{v} x for i = v k .. N.
template <typename Derived>
Eigen::VectorXd diff_filter(const Eigen::DenseBase<Derived>& x, int k, int v) {
  detail::check_filter_length(x.size(), k, v);
  const std::vector<double> w = difference_weights(k);
  const Eigen::Index start = static_cast<Eigen::Index>(v) * k;
  Eigen::VectorXd out(x.size() - start);
  for (Eigen::Index i = start; i < x.size(); ++i) out(i - start) = difference_at(x, w, i, v);
  return out;
}

inline Eigen::VectorXd diff_filter(const SeriesGrid& series, int k, int v) { return diff_filter(series.values, k, v); }

/// Raw power variation V(x, p, k, v) = sum_{i = vk}^{N} |Delta_{i,k}^{v} x|^p,
/// summed left to right with compensation.
template <typename Derived>
PowerVariationResult power_variation(const Eigen::DenseBase<Derived>& x, double p, int k, int v) {
  detail::check_power(p);
  detail::check_filter_length(x.size(), k, v);
  const std::vector<double> w = difference_weights(k);
  CompensatedSum sum;
  for (Eigen::Index i = static_cast<Eigen::Index>(v) * k; i < x.size(); ++i)
    sum.add(std::pow(std::abs(difference_at(x, w, i, v)), p));
  PowerVariationResult r;
  r.p = p;
  r.filter = FilterSpec{k, v, std::nullopt};
  r.raw = sum.value();
  r.count = static_cast<long>(x.size() - static_cast<Eigen::Index>(v) * k);
  return r;
}

PowerVariationResult power_variation(const SeriesGrid& series, double p, int k, int v);

/// Vbar = delta * tau^{-p} * V; tau is supplied by the caller (tau_k(v delta)
/// for a known kernel).
PowerVariationResult normalized_pv(const SeriesGrid& series, double p, int k, int v, double tau);

/// Gapped power variation. v = 1 keeps the increments ending at i u for
/// i = [k/u] + 1 .. [N/u]; v = 2 keeps the spacing-2 increments ending at
/// i u + [u/2] for i = [k/u] + 1 .. [N/u] - 1. Normalized with u * delta and
/// tau when tau is given.
PowerVariationResult gapped_pv(const SeriesGrid& series, double p, int k, int u, int v,
                               std::optional<double> tau = std::nullopt);

/// Shortest series (number of observations) for which gapped_pv is defined.
long gapped_min_length(int k, int u, int v);

/// Chunked evaluation of V(x, p, k, v). Feeding any partition of a series
/// gives the same bits as power_variation on the whole series.
class StreamingPowerVariation {
 public:
  StreamingPowerVariation(double p, int k, int v);

  void push(std::span<const double> chunk);
  void push(double value);
  long observations() const noexcept { return seen_; }
  PowerVariationResult result() const;

 private:
  double p_;
  int k_, v_;
  std::vector<double> weights_;
  // Ring buffer of the last v k + 1 observations.
  std::vector<double> ring_;
  long seen_ = 0;
  long count_ = 0;
  CompensatedSum sum_;
};

}  // namespace bss
