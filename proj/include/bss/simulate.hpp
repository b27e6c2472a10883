#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "bss/kernel.hpp"
#include "bss/series.hpp"

namespace bss {

enum class SigmaKind { constant, exp_ou, smooth_exp_ou };

std::string to_string(SigmaKind kind);
/// Accepts "constant", "exp-ou", "smooth-exp-ou"; ConfigError otherwise.
SigmaKind parse_sigma_kind(const std::string& name);

/// Intermittency model. log sigma = log(level) + Z with Z a stationary
/// Gaussian process of standard deviation `volvol`:
///  - exp_ou: Z is an Ornstein-Uhlenbeck process with rate `mean_reversion`;
///  - smooth_exp_ou: dZ = (-mean_reversion Z + Y) dt with Y an OU process of
///    rate `smoothing`, so sigma is continuously differentiable.
struct SigmaModel {
  SigmaKind kind = SigmaKind::constant;
  double level = 1.0;
  double volvol = 0.5;
  double mean_reversion = 1.0;
  double smoothing = 2.0;

  void validate() const;
  /// Hoelder exponent of the paths: 1 for constant and smooth_exp_ou, 1/2 for exp_ou.
  double smoothness() const noexcept { return kind == SigmaKind::exp_ou ? 0.5 : 1.0; }
};

/// Exact sampler for a stationary Gaussian sequence on n grid points by
/// circulant embedding.
///
/// The embedding has size m = 2^j >= 2(n - 1). If the circulant spectrum has
/// eigenvalues below -1e-8 times its largest one, m is doubled (the covariance
/// is evaluated at the extra lags) up to `max_size`; tiny negative eigenvalues
/// are clipped to zero and their mass reported.
class CirculantGaussian {
 public:
  /// `covariance(j)` is the autocovariance at lag index j >= 0.
  CirculantGaussian(const std::function<double(long)>& covariance, long n, long max_size = 1L << 25);

  long size() const noexcept { return n_; }
  long embedding_size() const noexcept { return static_cast<long>(sqrt_eig_.size()); }
  /// Sum of clipped negative eigenvalues relative to the largest one.
  double clipped_mass() const noexcept { return clipped_; }

  /// One path drawn from stream (seed, stream).
  Eigen::VectorXd sample(std::uint64_t seed, std::uint64_t stream) const;

 private:
  long n_;
  Eigen::VectorXd sqrt_eig_;
  double clipped_ = 0.0;
};

/// Fractional Gaussian noise covariance at lag j for unit spacing.
double fgn_covariance(double hurst, long j);

/// fBm B_0 = 0, B_delta, ..., B_{(n-1) delta} (n points).
SeriesGrid simulate_fbm(double hurst, long n, double delta, std::uint64_t seed, std::uint64_t stream = 0);

/// Reusable exact sampler for the Gaussian core G on n points at spacing delta.
/// The lag table c(j delta) and the embedding are computed once.
class GaussianCoreSimulator {
 public:
  GaussianCoreSimulator(const KernelSpec& spec, long n, double delta);

  SeriesGrid sample(std::uint64_t seed, std::uint64_t stream = 0) const;
  const CirculantGaussian& embedding() const noexcept { return *embedding_; }
  const GammaKernel& kernel() const noexcept { return kernel_; }

 private:
  KernelSpec spec_;
  GammaKernel kernel_;
  long n_;
  double delta_;
  std::shared_ptr<const CirculantGaussian> embedding_;
};

SeriesGrid simulate_gaussian_core(const KernelSpec& spec, long n, double delta, std::uint64_t seed);

/// sigma on n grid points started from its stationary law.
SeriesGrid simulate_sigma(const SigmaModel& model, long n, double delta, std::uint64_t seed,
                          std::uint64_t stream = 0);

struct BssOptions {
  int oversample = 8;
  /// Kernel truncation horizon; <= 0 selects the smallest horizon with tail
  /// mass below 1e-6 c(0).
  double burn_in = 0.0;
};

/// A BSS path together with the integrated intermittency over its window.
struct BssPath {
  SeriesGrid series;
  /// int_0^t sigma_s^2 ds by the fine-grid Riemann sum of the simulation.
  double integrated_sigma2 = 0.0;
  /// Fine-grid sigma restricted to the observation window.
  Eigen::VectorXd sigma;
};

/// Truncated stochastic convolution X_t = int g(t - s) sigma_s dW_s on the
/// fine grid delta / oversample, read off on the coarse grid.
///
/// Noise cell j carries sigma at its left end times sqrt(fine step) Z_j. The
/// weight of the cell adjacent to t is the L2 average of g over that cell;
/// the remaining cells evaluate g at the point b* of the hybrid scheme, which
/// matches the local power-law mass of each cell. The convolution is one FFT
/// product whose weight transform is cached.
class BssSimulator {
 public:
  BssSimulator(const KernelSpec& spec, const SigmaModel& model, long n, double delta, BssOptions options = {});

  BssPath sample(std::uint64_t seed, std::uint64_t rep = 0) const;

  double burn_in() const noexcept { return burn_in_; }
  double fine_step() const noexcept { return fine_; }
  /// Variance of the k-th order coarse difference of the discretized core,
  /// fine_step * sum (filtered weights)^2; compare with tau_k(delta)^2.
  double discretized_tau2(int k, int spacing = 1) const;
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  KernelSpec spec_;
  SigmaModel model_;
  long n_;
  double delta_;
  BssOptions options_;
  double fine_ = 0.0;
  double burn_in_ = 0.0;
  long fine_points_ = 0;
  long cells_ = 0;
  long fft_len_ = 0;
  std::vector<double> weights_;
  std::shared_ptr<const Eigen::VectorXcd> weight_fft_;
};

SeriesGrid simulate_bss(const KernelSpec& spec, const SigmaModel& model, long n, double delta, int oversample,
                        double burn_in, std::uint64_t seed);

}  // namespace bss
