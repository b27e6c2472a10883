#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "bss/errors.hpp"
#include "bss/rng.hpp"
#include "bss/variation.hpp"

using namespace bss;

namespace {

SeriesGrid grid(std::vector<double> v, double delta = 1.0) {
  SeriesGrid s;
  s.values = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  s.delta = delta;
  return s;
}

// Independent reference: binomial weights by recursion, left-to-right
// Neumaier summation of |sum_j w_j x[i - v j]|^p.
double naive_pv(const std::vector<double>& x, double p, int k, int v) {
  std::vector<double> w(k + 1);
  w[0] = 1;
  for (int j = 1; j <= k; ++j) w[j] = -w[j - 1] * (k - j + 1) / j;
  double sum = 0, comp = 0;
  for (std::size_t i = static_cast<std::size_t>(v * k); i < x.size(); ++i) {
    double d = 0;
    for (int j = 0; j <= k; ++j) d += w[j] * x[i - static_cast<std::size_t>(v * j)];
    const double t = std::pow(std::abs(d), p);
    const double s = sum + t;
    comp += std::abs(sum) >= std::abs(t) ? (sum - s) + t : (t - s) + sum;
    sum = s;
  }
  return sum + comp;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("difference filter hand examples") {
  const auto sq = grid({0, 1, 4, 9});
  const Eigen::VectorXd d = diff_filter(sq, 2, 1);
  REQUIRE(d.size() == 2);
  CHECK(d(0) == 2.0);
  CHECK(d(1) == 2.0);
  CHECK(power_variation(sq, 1, 2, 1).raw == 4.0);
  CHECK(power_variation(grid({0, 1, 0, 1}), 2, 1, 1).raw == 3.0);
  CHECK(power_variation(grid({0, 1, 0, 1}), 2, 1, 1).count == 3);
}

TEST_CASE("constant and affine series are annihilated exactly") {
  for (int k : {1, 2, 3})
    for (int v : {1, 2}) {
      const Eigen::VectorXd d = diff_filter(Eigen::VectorXd::Constant(40, 3.7), k, v);
      CHECK(d.cwiseAbs().maxCoeff() == 0.0);
    }
  // Dyadic coefficients keep every intermediate exactly representable.
  Eigen::VectorXd affine(1000);
  for (int i = 0; i < 1000; ++i) affine(i) = -2.25 + 0.375 * i;
  for (int v : {1, 2}) CHECK(diff_filter(affine, 2, v).cwiseAbs().maxCoeff() == 0.0);
  CHECK(power_variation(affine, 2.0, 2, 1).raw == 0.0);
}

TEST_CASE("filters accept strided Eigen expressions") {
  Eigen::VectorXd x(20);
  for (int i = 0; i < 20; ++i) x(i) = i * i;
  Eigen::Map<const Eigen::VectorXd, 0, Eigen::InnerStride<2>> even(x.data(), 10);
  const Eigen::VectorXd d = diff_filter(even, 2, 1);
  for (Eigen::Index i = 0; i < d.size(); ++i) CHECK(d(i) == 8.0);
  CHECK(power_variation(x.head(4), 1, 2, 1).raw == 4.0);
}

TEST_CASE("normalized power variation") {
  const auto s = grid({0.5, -1.0, 2.0, 0.25, 3.0});
  const auto raw = power_variation(s, 2.0, 2, 1);
  const auto nv = normalized_pv(s, 2.0, 2, 1, 1.0);
  CHECK(nv.normalized == raw.raw);
  const auto scaled = normalized_pv(grid({0.5, -1.0, 2.0, 0.25, 3.0}, 0.5), 1.5, 2, 1, 2.0);
  CHECK(scaled.normalized == doctest::Approx(0.5 * std::pow(2.0, -1.5) * scaled.raw).epsilon(1e-15));
  CHECK_THROWS_AS(normalized_pv(s, 2.0, 2, 1, 0.0), DomainError);
  CHECK(std::isnan(raw.normalized));
}

TEST_CASE("argument checks") {
  CHECK_THROWS_AS(power_variation(grid({1, 2, 3}), 0.0, 1, 1), DomainError);
  CHECK_THROWS_AS(power_variation(grid({1, 2}), 2.0, 2, 1), DomainError);
  CHECK_THROWS_AS(power_variation(grid({1, 2, 3, 4}), 2.0, 2, 2), DomainError);
  CHECK_THROWS_AS((FilterSpec{2, 3, std::nullopt}.validate()), DomainError);
  CHECK_THROWS_AS((FilterSpec{2, 1, 3}.validate()), DomainError);
  CHECK(FilterSpec::min_gap(2) == 4);
  CHECK(FilterSpec::min_gap(1) == 2);
  CHECK(FilterSpec::min_gap(3) == 5);
}

TEST_CASE("gapped power variation against direct index sets") {
  NormalStream z(5, 0);
  std::vector<double> x(1001);
  double acc = 0;
  for (double& v : x) v = (acc += z());
  const auto s = grid(x, 0.01);
  for (int u : {4, 7, 148}) {
    const long n = static_cast<long>(x.size()) - 1;
    double v1 = 0, v2 = 0;
    long c1 = 0, c2 = 0;
    for (long i = 2 / u + 1; i <= n / u; ++i, ++c1) {
      const long e = i * u;
      v1 += std::pow(std::abs(x[e] - 2 * x[e - 1] + x[e - 2]), 2.5);
    }
    for (long i = 2 / u + 1; i <= n / u - 1; ++i, ++c2) {
      const long e = i * u + u / 2;
      v2 += std::pow(std::abs(x[e] - 2 * x[e - 2] + x[e - 4]), 2.5);
    }
    const auto g1 = gapped_pv(s, 2.5, 2, u, 1);
    const auto g2 = gapped_pv(s, 2.5, 2, u, 2, 0.5);
    CHECK(g1.count == c1);
    CHECK(g2.count == c2);
    CHECK(g1.raw == doctest::Approx(v1).epsilon(1e-13));
    CHECK(g2.raw == doctest::Approx(v2).epsilon(1e-13));
    CHECK(g1.scale == doctest::Approx(u * 0.01).epsilon(1e-15));
    CHECK(g2.normalized == doctest::Approx(u * 0.01 * std::pow(0.5, -2.5) * v2).epsilon(1e-13));
    CHECK(g2.dropped == 0);
  }
}

TEST_CASE("gapped power variation edge cases") {
  CHECK(gapped_pv(grid(std::vector<double>(50, 2.0)), 2.0, 2, 4, 1).raw == 0.0);
  const long need1 = gapped_min_length(2, 10, 1), need2 = gapped_min_length(2, 10, 2);
  CHECK(need1 == 11);
  CHECK(need2 == 21);
  CHECK_NOTHROW(gapped_pv(grid(std::vector<double>(need1, 1.0)), 2.0, 2, 10, 1));
  CHECK_THROWS_AS(gapped_pv(grid(std::vector<double>(need1 - 1, 1.0)), 2.0, 2, 10, 1), DomainError);
  CHECK_NOTHROW(gapped_pv(grid(std::vector<double>(need2, 1.0)), 2.0, 2, 10, 2));
  CHECK_THROWS_AS(gapped_pv(grid(std::vector<double>(need2 - 1, 1.0)), 2.0, 2, 10, 2), DomainError);
  CHECK_THROWS_AS(gapped_pv(grid(std::vector<double>(100, 1.0)), 2.0, 2, 3, 1), DomainError);
}

TEST_CASE("streaming equals the naive sum bit for bit") {
  Philox4x32 gen(99, 0);
  NormalStream z(99, 1);
  const double powers[] = {0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 20 + gen() % 3000;
    const int k = 1 + static_cast<int>(gen() % 3);
    const int v = 1 + static_cast<int>(gen() % 2);
    const double p = powers[gen() % 6];
    std::vector<double> x(n);
    for (double& e : x) e = z() * std::exp(3 * z());
    StreamingPowerVariation stream(p, k, v);
    std::size_t at = 0;
    while (at < n) {
      const std::size_t len = std::min<std::size_t>(n - at, gen() % 257);
      stream.push(std::span<const double>(x.data() + at, len));
      at += len;
    }
    const double want = naive_pv(x, p, k, v);
    const auto batch = power_variation(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(n)), p, k, v);
    CHECK(same_bits(stream.result().raw, want));
    CHECK(same_bits(batch.raw, want));
    CHECK(stream.result().count == batch.count);
    CHECK(stream.observations() == static_cast<long>(n));
  }
}

TEST_CASE("streaming rejects results before the first increment") {
  StreamingPowerVariation s(2.0, 2, 2);
  s.push(1.0);
  s.push(2.0);
  CHECK_THROWS_AS(s.result(), DomainError);
}
