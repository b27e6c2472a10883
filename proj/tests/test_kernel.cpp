#include <doctest.h>

#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include "bss/errors.hpp"
#include "bss/kernel.hpp"

using namespace bss;

namespace {

// c(t) = Gamma(a + 1) / sqrt(pi) (t / 2 lambda)^{a + 1/2} K_{a + 1/2}(lambda t)
double bessel_autocovariance(double a, double lambda, double t) {
  return std::tgamma(a + 1.0) / std::sqrt(std::numbers::pi) * std::pow(t / (2.0 * lambda), a + 0.5) *
         std::cyl_bessel_k(a + 0.5, lambda * t);
}

double closed_c0(double a, double lambda) { return std::tgamma(2 * a + 1) / std::pow(2 * lambda, 2 * a + 1); }

KernelSpec spec(double a, double lambda) {
  KernelSpec s;
  s.alpha = a;
  s.lambda = lambda;
  return s;
}

}  // namespace

TEST_CASE("weight function values") {
  CHECK(gamma_kernel_eval(spec(-1.0 / 6, 1), 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(gamma_kernel_eval(spec(-1.0 / 6, 0.0884), 10.0) ==
        doctest::Approx(std::pow(10.0, -1.0 / 6) * std::exp(-0.884)).epsilon(1e-14));
  CHECK(gamma_kernel_eval(spec(-1.0 / 6, 0.0884), 10.0) == doctest::Approx(0.28146).epsilon(2e-6));
  CHECK_THROWS_AS(gamma_kernel_eval(spec(0.25, 0.5), 0.0), DomainError);
  CHECK_THROWS_AS(gamma_kernel_eval(spec(0.25, 0.5), -1.0), DomainError);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(spec(0.0, 1).validate(), DomainError);
  CHECK_THROWS_AS(spec(0.5, 1).validate(), DomainError);
  CHECK_THROWS_AS(spec(-0.5, 1).validate(), DomainError);
  CHECK_THROWS_AS(spec(0.1, 0).validate(), DomainError);
  CHECK_THROWS_AS(GammaKernel(spec(0.1, -1)), DomainError);
}

TEST_CASE("autocovariance at zero matches the gamma function") {
  CHECK(kernel_autocovariance(spec(0.25, 1), 0) == doctest::Approx(0.313329).epsilon(1e-6));
  CHECK(kernel_autocovariance(spec(-1.0 / 6, 1), 0) == doctest::Approx(0.853041).epsilon(1e-6));
  for (double a : {-0.45, -0.3, 0.1, 0.35, 0.49})
    for (double l : {0.0884, 1.0, 5.0})
      CHECK(kernel_autocovariance(spec(a, l), 0) == doctest::Approx(closed_c0(a, l)).epsilon(1e-9));
}

TEST_CASE("autocovariance matches the Bessel closed form") {
  for (double a : {-0.3, -1.0 / 6, 0.1, 0.35})
    for (double t : {1e-3, 0.05, 0.7, 3.0, 12.0}) {
      const double want = bessel_autocovariance(a, 1.0, t);
      CHECK(kernel_autocovariance(spec(a, 1), t) == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("variogram limits and Bessel oracle") {
  GammaKernel g(spec(-1.0 / 6, 1));
  CHECK(g.variogram(0) == 0.0);
  CHECK(g.variogram(60.0) == doctest::Approx(2 * closed_c0(-1.0 / 6, 1)).epsilon(1e-9));
  for (double t : {0.02, 0.5, 2.0}) {
    const double want = 2.0 * (closed_c0(-1.0 / 6, 1) - bessel_autocovariance(-1.0 / 6, 1, t));
    CHECK(g.variogram(t) == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("autocovariance is positive and nonincreasing, variogram nondecreasing") {
  for (double a : {-0.3, 0.2}) {
    GammaKernel g(spec(a, 1));
    double prev_c = g.autocovariance(0), prev_r = 0.0;
    for (double t = 1e-4; t < 20; t *= 1.5) {
      const double c = g.autocovariance(t), r = g.variogram(t);
      CHECK(c > 0.0);
      CHECK(c <= prev_c * (1 + 1e-12));
      CHECK(r >= prev_r * (1 - 1e-12));
      prev_c = c;
      prev_r = r;
    }
    CHECK(g.autocovariance(60.0) < 1e-20);
  }
}

TEST_CASE("tau_k agrees with the double binomial sum of c") {
  const double a = 0.1, d = 0.1;
  const auto c = [&](double t) { return t == 0 ? closed_c0(a, 1) : bessel_autocovariance(a, 1, t); };
  const double k1 = 2 * (c(0) - c(d));
  const double k2 = 6 * c(0) - 8 * c(d) + 2 * c(2 * d);
  CHECK(tau_k(spec(a, 1), 1, d) * tau_k(spec(a, 1), 1, d) == doctest::Approx(k1).epsilon(1e-8));
  CHECK(tau_k(spec(a, 1), 2, d) * tau_k(spec(a, 1), 2, d) == doctest::Approx(k2).epsilon(1e-8));
  GammaKernel g(spec(-1.0 / 6, 1));
  const double v = g.variogram(1e-3), v2 = g.variogram(2e-3);
  CHECK(std::pow(g.tau(2, 1e-3), 2) == doctest::Approx(4 * v - v2).epsilon(1e-9));
}

TEST_CASE("frequency ratio approaches 2^{2 alpha + 1}") {
  for (double a : {-0.3, -1.0 / 6, 0.1, 0.35}) {
    GammaKernel g(spec(a, 1));
    const double ratio = std::pow(g.tau(2, 2e-4) / g.tau(2, 1e-4), 2);
    CHECK(std::abs(ratio / std::pow(2.0, 2 * a + 1) - 1.0) < 0.02);
  }
}

TEST_CASE("homogeneity under lambda -> lambda / s, t -> s t") {
  const double a = -0.3, s = 3.0;
  for (double t : {0.01, 0.4, 2.0}) {
    const double base = kernel_autocovariance(spec(a, 1), t);
    const double scaled = kernel_autocovariance(spec(a, 1 / s), s * t);
    CHECK(scaled == doctest::Approx(std::pow(s, 2 * a + 1) * base).epsilon(1e-6));
  }
}

TEST_CASE("tiny lags are rejected") {
  GammaKernel g(spec(0.1, 1));
  CHECK_THROWS_AS(g.variogram(1e-14), DomainError);
  CHECK_THROWS_AS(g.tau(2, 1e-13), DomainError);
  CHECK_THROWS_AS(g.autocovariance(-1.0), DomainError);
}

TEST_CASE("burn-in horizon meets its tail mass") {
  for (double a : {-0.3, 0.35}) {
    GammaKernel g(spec(a, 1));
    const double t = g.burn_in(1e-6);
    CHECK(g.tail_mass(t) <= 1e-6 * g.autocovariance(0) * (1 + 1e-6));
    CHECK(g.tail_mass(0.95 * t) > 1e-6 * g.autocovariance(0));
  }
  GammaKernel g(spec(0.1, 2));
  CHECK(g.tail_mass(1e-12) == doctest::Approx(g.autocovariance(0)).epsilon(1e-8));
  CHECK_THROWS_AS(g.tail_mass(0), DomainError);
}

TEST_CASE("local exponent diagnostics") {
  const auto r1 = assumption_report(spec(0.25, 1));
  CHECK(r1.g_exponent >= 0.2375);
  CHECK(r1.g_exponent <= 0.2625);
  CHECK(r1.g_ok);
  const auto r2 = assumption_report(spec(-0.3, 1));
  CHECK(r2.r_exponent >= 0.38);
  CHECK(r2.r_exponent <= 0.42);
  CHECK(r2.r_ok);
  CHECK(assumption_report(spec(0.1, 5)).r_ok);
  CHECK(assumption_report(spec(0.1, 0.1)).r_ok);
  CHECK(assumption_report(spec(0.1, 0.1)).g_ok);
}

TEST_CASE("concurrent cache use gives serial results") {
  GammaKernel shared(spec(-1.0 / 6, 1));
  std::vector<double> lags;
  for (int i = 1; i <= 200; ++i) lags.push_back(i * 0.013);
  std::vector<double> serial;
  {
    GammaKernel fresh(spec(-1.0 / 6, 1));
    for (double t : lags) serial.push_back(fresh.variogram(t));
  }
  std::vector<std::vector<double>> out(4, std::vector<double>(lags.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < 4; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = 0; i < lags.size(); ++i) out[w][i] = shared.variogram(lags[(i + 37 * w) % lags.size()]);
    });
  for (auto& t : pool) t.join();
  for (int w = 0; w < 4; ++w)
    for (std::size_t i = 0; i < lags.size(); ++i) CHECK(out[w][i] == serial[(i + 37 * w) % lags.size()]);
  CHECK(shared.cache_size() > 0);
}

TEST_CASE("difference weights") {
  CHECK(difference_weights(1) == std::vector<double>{1, -1});
  CHECK(difference_weights(2) == std::vector<double>{1, -2, 1});
  CHECK(difference_weights(3) == std::vector<double>{1, -3, 3, -1});
}
