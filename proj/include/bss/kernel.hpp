#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace bss {

/// Parameters of the gamma weight function g(x) = x^alpha exp(-lambda x).
struct KernelSpec {
  double alpha = -1.0 / 6.0;
  double lambda = 1.0;
  /// Relative tolerance of the internal quadratures.
  double quad_tol = 1e-10;

  /// Throws DomainError unless alpha in (-1/2, 0) u (0, 1/2), lambda > 0 and
  /// quad_tol in (0, 1e-3].
  void validate() const;
};

/// Smallest lag accepted by the variogram and tau_k; below it the increment
/// variance is lost to cancellation.
inline constexpr double kMinLag = 1e-12;

/// Gamma kernel together with its second-order structure: the autocovariance
/// c(t) of the Gaussian core, the variogram R(t) = 2(c(0) - c(t)) and the
/// k-th order increment scale tau_k.
///
/// Values are obtained by adaptive Gauss-Kronrod quadrature. The u = 0
/// singularity is removed by a power substitution and the exponential tail is
/// cut once panels stop contributing. R is integrated directly as
/// int_0^t g^2 + int_0^inf (g(v+t) - g(v))^2 dv, so small lags do not suffer
/// the cancellation in c(0) - c(t).
///
/// Results are memoised per lag. The cache takes a shared lock for lookups and
/// an exclusive lock for inserts, so one instance can serve concurrent
/// Monte Carlo workers.
class GammaKernel {
 public:
  explicit GammaKernel(const KernelSpec& spec, std::size_t cache_capacity = 1u << 16);
  GammaKernel(const GammaKernel& other);
  GammaKernel& operator=(const GammaKernel& other);
  GammaKernel(GammaKernel&&) noexcept;
  GammaKernel& operator=(GammaKernel&&) noexcept;
  ~GammaKernel();

  const KernelSpec& spec() const noexcept { return spec_; }

  /// g(x); DomainError for x <= 0.
  double weight(double x) const;
  /// c(t) = int_0^inf g(u) g(u + t) du, t >= 0.
  double autocovariance(double t) const;
  /// r(t) = c(t) / c(0).
  double correlation(double t) const;
  /// R(t) = E[(G_{s+t} - G_s)^2].
  double variogram(double t) const;
  /// Standard deviation of the k-th order difference of G at spacing delta.
  double tau(int k, double delta) const;
  /// int_T^inf g^2.
  double tail_mass(double horizon) const;
  /// Smallest horizon whose tail mass is below rel_mass * c(0).
  double burn_in(double rel_mass = 1e-6) const;

  std::size_t cache_size() const;

 private:
  double compute_autocovariance(double t) const;
  double compute_variogram(double t) const;

  struct Cache;
  KernelSpec spec_;
  std::size_t capacity_;
  std::unique_ptr<Cache> cache_;
};

/// Binomial difference filter (-1)^j C(k, j), j = 0..k.
std::vector<double> difference_weights(int k);

double gamma_kernel_eval(const KernelSpec& spec, double x);
double kernel_autocovariance(const KernelSpec& spec, double t);
double variogram(const KernelSpec& spec, double t);
double tau_k(const KernelSpec& spec, int k, double delta);

/// Empirical local exponents of g and R near zero compared with alpha and
/// 2 alpha + 1.
struct AssumptionReport {
  double g_exponent = 0.0;
  double r_exponent = 0.0;
  double g_target = 0.0;
  double r_target = 0.0;
  bool g_ok = false;
  bool r_ok = false;
  /// int_1^inf |g''|^2, the deterministic part of the F_t integrability check.
  double second_derivative_tail = 0.0;
  std::vector<double> grid;
  std::vector<std::string> notes;
};

AssumptionReport assumption_report(const KernelSpec& spec);

}  // namespace bss
