#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "bss/errors.hpp"
#include "bss/rng.hpp"
#include "bss/simulate.hpp"
#include "bss/spectral.hpp"
#include "bss/stats.hpp"

using namespace bss;

namespace {

SeriesGrid white(long n, double delta, std::uint64_t seed) {
  SeriesGrid s;
  s.values.resize(n);
  s.delta = delta;
  NormalStream z(seed, 0);
  for (long i = 0; i < n; ++i) s.values(i) = z();
  return s;
}

PsdEstimate model_psd(double a, double lambda, double c) {
  PsdEstimate p;
  p.delta = 1.0 / 10.0;
  p.fft_len = 1 << 14;
  const long bins = p.fft_len / 2 + 1;
  p.freqs.resize(bins);
  p.density.resize(bins);
  for (long j = 0; j < bins; ++j) {
    p.freqs(j) = j * p.bin_width();
    p.density(j) = std::exp(c - (1 + a) * std::log1p(std::pow(2 * std::numbers::pi * p.freqs(j) / lambda, 2)));
  }
  return p;
}

}  // namespace

TEST_CASE("sinusoid peaks at its frequency") {
  SeriesGrid s;
  const long n = 1 << 14;
  s.delta = 1e-3;
  s.values.resize(n);
  const double f0 = 123.4;
  for (long i = 0; i < n; ++i) s.values(i) = std::sin(2 * std::numbers::pi * f0 * i * s.delta);
  const auto p = welch_psd(s, 2048, 0.5);
  Eigen::Index top;
  p.density.maxCoeff(&top);
  CHECK(std::abs(p.freqs(top) - f0) <= p.bin_width());
  CHECK(p.segments == 15);
}

TEST_CASE("white noise has a flat density") {
  const double delta = 0.01;
  const auto s = white(1 << 17, delta, 4);
  const auto p = welch_psd(s, 1024, 0.5, Taper::hann);
  // One-sided level 2 delta sigma^2.
  std::vector<double> inner(p.density.data() + 1, p.density.data() + p.density.size() - 1);
  const double m = mean(inner), sd = std::sqrt(sample_variance(inner));
  CHECK(std::abs(m / (2 * delta) - 1.0) < 3 * sd / std::sqrt(static_cast<double>(inner.size())) / (2 * delta) + 0.01);
  const std::size_t half = inner.size() / 2;
  const double lo = mean(std::span<const double>(inner.data(), half));
  const double hi = mean(std::span<const double>(inner.data() + half, inner.size() - half));
  CHECK(std::abs(lo - hi) < 3 * sd * std::sqrt(2.0 / static_cast<double>(half)));
  long outside = 0;
  for (double v : inner) outside += std::abs(v - m) > 4 * sd ? 1 : 0;
  CHECK(outside == 0);
  CHECK(p.total_power() == doctest::Approx(sample_variance(std::vector<double>(s.values.data(), s.values.data() + s.size()))).epsilon(0.02));
}

TEST_CASE("density scales by c^2 and is invariant under reversal") {
  const auto s = white(1024 + 7 * 512, 0.5, 6);
  const auto p = welch_psd(s, 1024, 0.5);
  SeriesGrid twice = s;
  twice.values *= 2.0;
  const auto q = welch_psd(twice, 1024, 0.5);
  for (Eigen::Index j = 0; j < p.density.size(); ++j) CHECK(q.density(j) == 4.0 * p.density(j));
  SeriesGrid rev = s;
  rev.values = s.values.reverse().eval();
  const auto r = welch_psd(rev, 1024, 0.5);
  CHECK(p.segments == 8);
  for (Eigen::Index j = 0; j < p.density.size(); ++j) CHECK(r.density(j) == doctest::Approx(p.density(j)).epsilon(1e-10));
}

TEST_CASE("Welch argument checks") {
  const auto s = white(1000, 1, 1);
  CHECK_THROWS_AS(welch_psd(s, 800, 0.0), DomainError);
  CHECK_THROWS_AS(welch_psd(s, 2000, 0.5), DomainError);
  CHECK_THROWS_AS(welch_psd(s, 100, 0.95), DomainError);
  CHECK_NOTHROW(welch_psd(s, 500, 0.0, Taper::none));
  CHECK(parse_taper("none") == Taper::none);
  CHECK_THROWS_AS(parse_taper("kaiser"), ConfigError);
  const auto p = welch_psd(s, 300, 0.5);
  CHECK(p.fft_len == 512);
}

TEST_CASE("exact model spectrum is recovered") {
  const auto p = model_psd(-0.165, 0.0884, 1.3);
  const auto fit = fit_spectrum(p, 0, 2.0);
  CHECK(std::abs(fit.alpha + 0.165) < 1e-4);
  CHECK(std::abs(fit.lambda - 0.0884) < 1e-4);
  CHECK(fit.residual <= 1e-8);
  CHECK(fit.alpha_in_range);
  CHECK(fit.f_min == doctest::Approx(p.freqs(4)));

  auto scaled = p;
  scaled.density *= 9.0;
  const auto fs = fit_spectrum(scaled, 0, 2.0);
  CHECK(fs.alpha == doctest::Approx(fit.alpha).epsilon(1e-7));
  CHECK(fs.lambda == doctest::Approx(fit.lambda).epsilon(1e-7));
  CHECK(fs.log_const - fit.log_const == doctest::Approx(std::log(9.0)).epsilon(1e-7));
}

TEST_CASE("model spectrum recovery away from the defaults") {
  for (double a : {-0.4, 0.3})
    for (double l : {0.5, 5.0}) {
      const auto fit = fit_spectrum(model_psd(a, l, -2.0), 0.01, 4.9);
      CHECK(std::abs(fit.alpha - a) < 1e-4);
      CHECK(std::abs(fit.lambda / l - 1.0) < 1e-4);
    }
}

TEST_CASE("fit needs enough bins") {
  const auto p = model_psd(-0.165, 0.0884, 0.0);
  CHECK_THROWS_AS(fit_spectrum(p, 0.01, 0.01 + 10 * p.bin_width()), DomainError);
  CHECK(log_spectral_model(0.0, 0.2, 1.0, 0.7) == 0.7);
  CHECK(-2 * (1 + -1.0 / 6) == doctest::Approx(-5.0 / 3));
}

TEST_CASE("simulated core has the high-frequency power law") {
  KernelSpec k;
  const auto s = simulate_gaussian_core(k, 1 << 17, 1.0 / 256, 3);
  const auto p = welch_psd(s, 4096, 0.5);
  CHECK(std::abs(loglog_slope(p, 2.0, 16.0) + 5.0 / 3) < 0.1);
}
