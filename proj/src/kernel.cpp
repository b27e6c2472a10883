#include "bss/kernel.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "bss/errors.hpp"
#include "bss/quadrature.hpp"
#include "bss/stats.hpp"

namespace bss {

struct GammaKernel::Cache {
  mutable std::shared_mutex mutex;
  std::unordered_map<double, double> covariance;
  std::unordered_map<double, double> variogram;
};

namespace {

// Beyond this many e-foldings c(t) is below the smallest normal double.
constexpr double kNegligibleDecay = 700.0;

struct PanelSum {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;

  void add(const quad::Result& r) {
    value += r.value;
    error += r.error;
    converged = converged && r.converged;
  }
};

// Integrates f over [0, upper] (upper may be +inf). The first panel [0, first_break]
// absorbs a u^beta singularity; later panels double in width up to `scale` and
// then advance in steps of 4 * scale until the exponential tail stops
// contributing.
template <typename F>
PanelSum integrate_from_zero(F&& f, double upper, double first_break, double beta, double scale,
                             double rel_tol) {
  PanelSum total;
  const double b0 = std::min(first_break, upper);
  total.add(quad::integrate_power_singular(f, b0, beta, 0.0, rel_tol));
  double a = b0;
  int quiet = 0;
  while (a < upper) {
    double b = a < scale ? std::min(2.0 * a, scale) : a + 4.0 * scale;
    if (b <= a) b = a + scale;
    b = std::min(b, upper);
    const quad::Result r = quad::integrate(f, a, b, 0.0, rel_tol);
    total.add(r);
    a = b;
    if (std::isinf(upper) && a >= 2.0 * scale) {
      quiet = std::abs(r.value) <= 1e-17 * std::abs(total.value) ? quiet + 1 : 0;
      if (quiet >= 2) break;
    }
  }
  return total;
}

}  // namespace

void KernelSpec::validate() const {
  if (!(alpha > -0.5 && alpha < 0.5) || alpha == 0.0)
    throw DomainError("kernel alpha must lie in (-1/2, 0) u (0, 1/2)");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("kernel lambda must be positive");
  if (!(quad_tol > 0.0 && quad_tol <= 1e-3)) throw DomainError("quad_tol must lie in (0, 1e-3]");
}

std::vector<double> difference_weights(int k) {
  if (k < 1) throw DomainError("difference order k must be >= 1");
  std::vector<double> w(static_cast<std::size_t>(k) + 1);
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    w[static_cast<std::size_t>(j)] = (j % 2 == 0) ? binom : -binom;
    binom = binom * (k - j) / (j + 1);
  }
  return w;
}

GammaKernel::GammaKernel(const KernelSpec& spec, std::size_t cache_capacity)
    : spec_(spec), capacity_(cache_capacity), cache_(std::make_unique<Cache>()) {
  spec_.validate();
}

GammaKernel::GammaKernel(const GammaKernel& other)
    : spec_(other.spec_), capacity_(other.capacity_), cache_(std::make_unique<Cache>()) {}

GammaKernel& GammaKernel::operator=(const GammaKernel& other) {
  if (this != &other) {
    spec_ = other.spec_;
    capacity_ = other.capacity_;
    cache_ = std::make_unique<Cache>();
  }
  return *this;
}

GammaKernel::GammaKernel(GammaKernel&&) noexcept = default;
GammaKernel& GammaKernel::operator=(GammaKernel&&) noexcept = default;
GammaKernel::~GammaKernel() = default;

std::size_t GammaKernel::cache_size() const {
  std::shared_lock lock(cache_->mutex);
  return cache_->covariance.size() + cache_->variogram.size();
}

double GammaKernel::weight(double x) const {
  if (!(x > 0.0)) throw DomainError("gamma kernel evaluated at x <= 0");
  return std::pow(x, spec_.alpha) * std::exp(-spec_.lambda * x);
}

double GammaKernel::compute_autocovariance(double t) const {
  const double alpha = spec_.alpha;
  const double lambda = spec_.lambda;
  const double scale = 1.0 / lambda;
  const double rel = std::max(0.1 * spec_.quad_tol, 1e-13);
  PanelSum sum;
  if (t == 0.0) {
    auto f = [&](double u) { return std::exp(2.0 * alpha * std::log(u) - 2.0 * lambda * u); };
    sum = integrate_from_zero(f, std::numeric_limits<double>::infinity(), scale, 2.0 * alpha, scale, rel);
  } else {
    auto f = [&](double u) {
      return std::exp(alpha * (std::log(u) + std::log(u + t)) - lambda * (2.0 * u + t));
    };
    sum = integrate_from_zero(f, std::numeric_limits<double>::infinity(), std::min(t, scale), alpha, scale, rel);
  }
  if (!sum.converged && sum.error > 100.0 * spec_.quad_tol * std::abs(sum.value)) {
    std::ostringstream msg;
    msg << "autocovariance quadrature did not converge at t=" << t << " (achieved relative error "
        << sum.error / std::abs(sum.value) << ")";
    throw NumericError(msg.str(), sum.error / std::abs(sum.value));
  }
  return sum.value;
}

double GammaKernel::compute_variogram(double t) const {
  const double alpha = spec_.alpha;
  const double lambda = spec_.lambda;
  const double scale = 1.0 / lambda;
  const double rel = std::max(0.1 * spec_.quad_tol, 1e-13);
  auto g = [&](double v) { return std::exp(alpha * std::log(v) - lambda * v); };
  auto g2 = [&](double v) { return std::exp(2.0 * alpha * std::log(v) - 2.0 * lambda * v); };
  auto gap = [&](double v) {
    const double d = g(v + t) - g(v);
    return d * d;
  };
  PanelSum near = integrate_from_zero(g2, t, std::min(t, scale), 2.0 * alpha, scale, rel);
  PanelSum far = integrate_from_zero(gap, std::numeric_limits<double>::infinity(), std::min(t, scale),
                                     std::min(2.0 * alpha, 0.0), scale, rel);
  const double value = near.value + far.value;
  const double err = near.error + far.error;
  if ((!near.converged || !far.converged) && err > 100.0 * spec_.quad_tol * value) {
    std::ostringstream msg;
    msg << "variogram quadrature did not converge at t=" << t << " (achieved relative error " << err / value
        << ")";
    throw NumericError(msg.str(), err / value);
  }
  return value;
}

double GammaKernel::autocovariance(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("autocovariance requires a finite lag t >= 0");
  if (spec_.lambda * t > kNegligibleDecay) return 0.0;
  {
    std::shared_lock lock(cache_->mutex);
    if (auto it = cache_->covariance.find(t); it != cache_->covariance.end()) return it->second;
  }
  const double value = compute_autocovariance(t);
  std::unique_lock lock(cache_->mutex);
  if (cache_->covariance.size() < capacity_) cache_->covariance.emplace(t, value);
  return value;
}

double GammaKernel::correlation(double t) const { return autocovariance(t) / autocovariance(0.0); }

double GammaKernel::variogram(double t) const {
  if (t == 0.0) return 0.0;
  if (!(t >= kMinLag) || !std::isfinite(t))
    throw DomainError("variogram lag must be 0 or at least 1e-12 time units");
  {
    std::shared_lock lock(cache_->mutex);
    if (auto it = cache_->variogram.find(t); it != cache_->variogram.end()) return it->second;
  }
  const double value = compute_variogram(t);
  std::unique_lock lock(cache_->mutex);
  if (cache_->variogram.size() < capacity_) cache_->variogram.emplace(t, value);
  return value;
}

double GammaKernel::tau(int k, double delta) const {
  if (!(delta >= kMinLag)) throw DomainError("tau_k requires delta >= 1e-12");
  const std::vector<double> w = difference_weights(k);
  // Sum_{i,j} w_i w_j c(|i-j| delta) rewritten with c = c(0) - R/2; the c(0)
  // part vanishes because the weights sum to zero.
  double variance = 0.0;
  for (int d = 1; d <= k; ++d) {
    double a = 0.0;
    for (int i = 0; i + d <= k; ++i) a += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i + d)];
    variance -= a * variogram(d * delta);
  }
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    std::ostringstream msg;
    msg << "tau_k: nonpositive increment variance " << variance << " for k=" << k << ", delta=" << delta;
    throw NumericError(msg.str());
  }
  return std::sqrt(variance);
}

double GammaKernel::tail_mass(double horizon) const {
  if (!(horizon > 0.0)) throw DomainError("tail_mass requires a positive horizon");
  const double alpha = spec_.alpha;
  const double lambda = spec_.lambda;
  auto g2 = [&](double v) { return std::exp(2.0 * alpha * std::log(v) - 2.0 * lambda * v); };
  PanelSum sum;
  const double scale = 1.0 / lambda;
  double a = horizon;
  int quiet = 0;
  while (quiet < 2) {
    const quad::Result r = quad::integrate(g2, a, a + 4.0 * scale, 0.0, 1e-12);
    sum.add(r);
    a += 4.0 * scale;
    quiet = (r.value <= 1e-17 * sum.value || r.value == 0.0) ? quiet + 1 : 0;
  }
  return sum.value;
}

double GammaKernel::burn_in(double rel_mass) const {
  if (!(rel_mass > 0.0 && rel_mass < 1.0)) throw DomainError("burn_in relative mass must lie in (0, 1)");
  const double target = rel_mass * autocovariance(0.0);
  double hi = 1.0 / spec_.lambda;
  while (tail_mass(hi) > target) hi *= 2.0;
  double lo = hi / 2.0;
  if (tail_mass(lo) <= target) lo = 0.0;
  for (int it = 0; it < 60 && hi - lo > 1e-6 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid > 0.0 && tail_mass(mid) <= target ? hi : lo) = mid;
  }
  return hi;
}

double gamma_kernel_eval(const KernelSpec& spec, double x) { return GammaKernel(spec, 0).weight(x); }

double kernel_autocovariance(const KernelSpec& spec, double t) { return GammaKernel(spec, 0).autocovariance(t); }

double variogram(const KernelSpec& spec, double t) { return GammaKernel(spec, 0).variogram(t); }

double tau_k(const KernelSpec& spec, int k, double delta) { return GammaKernel(spec, 0).tau(k, delta); }

AssumptionReport assumption_report(const KernelSpec& spec) {
  const GammaKernel kernel(spec);
  AssumptionReport report;
  report.g_target = spec.alpha;
  report.r_target = 2.0 * spec.alpha + 1.0;
  // Decade grid well inside the inertial range 1/lambda.
  const double top = 1e-3 / spec.lambda;
  std::vector<double> log_x, log_g, log_r;
  for (int i = 0; i <= 3; ++i) {
    const double x = top * std::pow(10.0, -i);
    report.grid.push_back(x);
    log_x.push_back(std::log(x));
    log_g.push_back(std::log(kernel.weight(x)));
    log_r.push_back(std::log(kernel.variogram(x)));
  }
  report.g_exponent = ols_slope(log_x, log_g);
  report.r_exponent = ols_slope(log_x, log_r);
  report.g_ok = std::abs(report.g_exponent - report.g_target) <= 0.05 * std::abs(report.g_target);
  report.r_ok = std::abs(report.r_exponent - report.r_target) <= 0.05 * std::abs(report.r_target);
  if (!report.g_ok) report.notes.push_back("local exponent of g deviates from alpha by more than 5%");
  if (!report.r_ok) report.notes.push_back("local exponent of R deviates from 2 alpha + 1 by more than 5%");

  const double a = spec.alpha, l = spec.lambda;
  auto g2nd_sq = [&](double x) {
    const double s = a / x - l;
    const double v = (s * s - a / (x * x)) * std::pow(x, a) * std::exp(-l * x);
    return v * v;
  };
  double tail = 0.0;
  for (double lo = 1.0; lo < 1.0 + 60.0 / l; lo += 4.0 / l) tail += quad::integrate(g2nd_sq, lo, lo + 4.0 / l, 0.0, 1e-10).value;
  report.second_derivative_tail = tail;
  report.notes.push_back(
      "stochastic integrability of F_t and the limsup condition on L_R(2k) are not checked numerically");
  return report;
}

}  // namespace bss
