#include <doctest.h>

#include <cmath>
#include <vector>

#include "bss/rng.hpp"
#include "bss/stats.hpp"

using namespace bss;

TEST_CASE("compensated sum recovers small terms lost by naive summation") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1000.0);
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double q : {1e-10, 1e-4, 0.025, 0.3, 0.5, 0.7, 0.975, 1 - 1e-6}) {
    const double x = normal_quantile(q);
    CHECK(normal_cdf(x) == doctest::Approx(q).epsilon(1e-12));
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(two_sided_z(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  CHECK(two_sided_z(0.99) == doctest::Approx(2.5758293035489).epsilon(1e-12));
}

TEST_CASE("normal stream has standard moments and passes KS") {
  NormalStream z(42, 0);
  std::vector<double> x(200000);
  z.fill(x);
  CHECK(std::abs(mean(x)) < 4.0 / std::sqrt(2e5));
  CHECK(std::abs(sample_variance(x) - 1.0) < 4.0 * std::sqrt(2.0 / 2e5));
  CHECK(ks_distance_normal(x) < 1.63 / std::sqrt(2e5) * 1.5);
  CHECK(std::abs(lag_autocorrelation(x, 1)) < 4.0 / std::sqrt(2e5));
}

TEST_CASE("philox streams are reproducible and distinct") {
  Philox4x32 a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  bool differ_stream = false, differ_seed = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a();
    CHECK(x == b());
    differ_stream |= (x != c());
    differ_seed |= (x != d());
  }
  CHECK(differ_stream);
  CHECK(differ_seed);
  CHECK(stream_id(3, Component::sigma) == 25u);
}

TEST_CASE("uniforms lie in the open unit interval") {
  Philox4x32 g(1, 1);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = g.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("ols slope is exact on a line") {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(3.0 - 0.5 * v);
  CHECK(ols_slope(x, y) == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("KS distance of a sample far from normal is large") {
  std::vector<double> x(1000, 5.0);
  CHECK(ks_distance_normal(x) > 0.99);
}
