#include "bss/variation.hpp"

#include <sstream>

namespace bss {

void FilterSpec::validate() const {
  if (k < 1) throw DomainError("difference order k must be >= 1");
  if (v != 1 && v != 2) throw DomainError("frequency multiplier v must be 1 or 2");
  if (gap && *gap < min_gap(k)) {
    std::ostringstream msg;
    msg << "gap u = " << *gap << " is below the minimum " << min_gap(k) << " for k = " << k;
    throw DomainError(msg.str());
  }
}

PowerVariationResult power_variation(const SeriesGrid& series, double p, int k, int v) {
  PowerVariationResult r = power_variation(series.values, p, k, v);
  r.scale = series.delta;
  return r;
}

PowerVariationResult normalized_pv(const SeriesGrid& series, double p, int k, int v, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("tau must be positive");
  PowerVariationResult r = power_variation(series, p, k, v);
  r.tau_used = tau;
  r.normalized = r.scale * std::pow(tau, -p) * r.raw;
  return r;
}

long gapped_min_length(int k, int u, int v) {
  const long first = k / u + 1;
  // Last observation index N must satisfy [N/u] >= first (v = 1) or first + 1 (v = 2).
  return static_cast<long>(u) * (first + (v == 2 ? 1 : 0)) + 1;
}

PowerVariationResult gapped_pv(const SeriesGrid& series, double p, int k, int u, int v, std::optional<double> tau) {
  detail::check_power(p);
  FilterSpec spec{k, v, u};
  spec.validate();
  if (tau && (!(*tau > 0.0) || !std::isfinite(*tau))) throw DomainError("tau must be positive");

  const Eigen::Index last = series.last_index();
  const long first = k / u + 1;
  const long top = static_cast<long>(last) / u - (v == 2 ? 1 : 0);
  if (top < first) {
    std::ostringstream msg;
    msg << "gapped power variation (k=" << k << ", u=" << u << ", v=" << v << ") has an empty index range; need at least "
        << gapped_min_length(k, u, v) << " observations";
    throw DomainError(msg.str());
  }

  const std::vector<double> w = difference_weights(k);
  const long shift = v == 2 ? u / 2 : 0;
  CompensatedSum sum;
  PowerVariationResult r;
  for (long i = first; i <= top; ++i) {
    const long end = i * u + shift;
    if (end > last || end - static_cast<long>(v) * k < 0) {
      ++r.dropped;
      continue;
    }
    sum.add(std::pow(std::abs(difference_at(series.values, w, end, v)), p));
    ++r.count;
  }
  r.p = p;
  r.filter = spec;
  r.raw = sum.value();
  r.scale = static_cast<double>(u) * series.delta;
  if (tau) {
    r.tau_used = *tau;
    r.normalized = r.scale * std::pow(*tau, -p) * r.raw;
  }
  return r;
}

StreamingPowerVariation::StreamingPowerVariation(double p, int k, int v)
    : p_(p), k_(k), v_(v), weights_(difference_weights(k)), ring_(static_cast<std::size_t>(v * k + 1), 0.0) {
  detail::check_power(p);
  if (v < 1) throw DomainError("frequency multiplier v must be >= 1");
}

void StreamingPowerVariation::push(double value) {
  const long width = static_cast<long>(ring_.size());
  ring_[static_cast<std::size_t>(seen_ % width)] = value;
  if (seen_ >= static_cast<long>(v_) * k_) {
    double d = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
      const long idx = seen_ - static_cast<long>(v_) * static_cast<long>(j);
      d += weights_[j] * ring_[static_cast<std::size_t>(idx % width)];
    }
    sum_.add(std::pow(std::abs(d), p_));
    ++count_;
  }
  ++seen_;
}

void StreamingPowerVariation::push(std::span<const double> chunk) {
  for (double x : chunk) push(x);
}

PowerVariationResult StreamingPowerVariation::result() const {
  if (seen_ <= static_cast<long>(v_) * k_)
    throw DomainError("series too short: need more than v*k = " + std::to_string(v_ * k_) + " observations");
  PowerVariationResult r;
  r.p = p_;
  r.filter = FilterSpec{k_, v_, std::nullopt};
  r.raw = sum_.value();
  r.count = count_;
  return r;
}

}  // namespace bss
