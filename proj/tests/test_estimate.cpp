#include <doctest.h>

#include <cmath>
#include <vector>

#include "bss/errors.hpp"
#include "bss/estimate.hpp"
#include "bss/rng.hpp"
#include "bss/simulate.hpp"
#include "bss/stats.hpp"

using namespace bss;

namespace {

KernelSpec spec(double a) {
  KernelSpec s;
  s.alpha = a;
  return s;
}

// Values on the 2^-20 lattice with |x| < 2^12, so that adding a dyadic
// affine drift and forming second differences is exact.
SeriesGrid quantize(const SeriesGrid& s) {
  SeriesGrid q = s;
  for (Eigen::Index i = 0; i < q.size(); ++i) q.values(i) = std::ldexp(std::round(std::ldexp(s.values(i), 20)), -20);
  return q;
}

const SeriesGrid& core_path() {
  static const SeriesGrid path = simulate_gaussian_core(spec(-1.0 / 6), 1 << 14, 1.0 / 1024, 77);
  return path;
}

}  // namespace

TEST_CASE("h_p inverts the frequency ratio limit") {
  for (double p : {1.0, 2.0, 4.0, 8.0})
    for (double a : {-0.3, -1.0 / 6, 0.1, 0.35}) {
      const double x = std::pow(2.0, (2 * a + 1) * p / 2);
      CHECK(std::abs(h_p(x, p) - a) < 1e-12);
    }
  const double x = 1.7, p = 2.5, e = 1e-6;
  CHECK(h_p_prime(x, p) == doctest::Approx((h_p(x + e, p) - h_p(x - e, p)) / (2 * e)).epsilon(1e-8));
  CHECK_THROWS_AS(h_p(0.0, 2), DomainError);
}

TEST_CASE("scale invariance of COF and alpha_hat") {
  const SeriesGrid& s = core_path();
  const double base = cof(s, 2.0);
  for (double c : {2.0, -0.5, 1024.0, 0.0078125}) {
    SeriesGrid t = s;
    t.values *= c;
    CHECK(cof(t, 2.0) == base);
    // |c|^p is a power of two for these p, so every term scales exactly.
    CHECK(alpha_hat(t, 1.0).alpha_hat == alpha_hat(s, 1.0).alpha_hat);
    CHECK(alpha_hat(t, 3.0).alpha_hat == alpha_hat(s, 3.0).alpha_hat);
  }
  SeriesGrid t = s;
  t.values *= 3.0;
  CHECK(cof(t, 2.0) == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("affine drift leaves alpha_hat unchanged exactly") {
  const SeriesGrid q = quantize(core_path());
  const double base = alpha_hat(q, 2.0).alpha_hat;
  SeriesGrid d = q;
  for (Eigen::Index i = 0; i < d.size(); ++i) d.values(i) += 5.5 - std::ldexp(static_cast<double>(i), -10);
  CHECK(alpha_hat(d, 2.0).alpha_hat == base);
  CHECK(cof_ci(d, 2.0, 0.95).std_error == cof_ci(q, 2.0, 0.95).std_error);
}

TEST_CASE("degenerate and out-of-range inputs") {
  SeriesGrid flat;
  flat.values = Eigen::VectorXd::Constant(100, 2.0);
  CHECK_THROWS_AS(cof(flat, 2.0), DegenerateInputError);
  CHECK_THROWS_AS(alpha_hat(flat, 2.0), DataError);

  // White noise sits at alpha = -1/2 and its running sum at alpha = 0; both
  // are excluded, so most intervals must be flagged.
  int flagged_noise = 0, flagged_walk = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SeriesGrid noise;
    noise.values.resize(1 << 14);
    NormalStream z(seed, 0);
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise.values(i) = z();
    const auto a = cof_ci(noise, 2.0, 0.95);
    CHECK(std::abs(a.alpha_hat + 0.5) < 5 * a.std_error);
    CHECK(a.diagnostics.hurst_plugin >= 0.02);
    flagged_noise += a.regime_ok ? 0 : 1;
    CHECK(a.regime_ok == a.warnings.empty());
    for (Eigen::Index i = 1; i < noise.size(); ++i) noise.values(i) += noise.values(i - 1);
    const auto b = cof_ci(noise, 2.0, 0.95);
    CHECK(std::abs(b.alpha_hat) < 5 * b.std_error);
    flagged_walk += b.regime_ok ? 0 : 1;
    CHECK(b.regime_ok == !(b.ci_low <= 0.0 && 0.0 <= b.ci_high));
  }
  CHECK(flagged_noise >= 15);
  CHECK(flagged_walk >= 15);
}

TEST_CASE("plain interval structure") {
  const SeriesGrid& s = core_path();
  const auto r = cof_ci(s, 2.0, 0.95);
  CHECK(r.method == "plain");
  CHECK(r.regime_ok);
  CHECK(r.std_error > 0.0);
  CHECK(r.ci_high - r.alpha_hat == doctest::Approx(1.959963984540054 * r.std_error).epsilon(1e-12));
  REQUIRE(r.diagnostics.lambda);
  const auto given = cof_ci(s, 2.0, 0.95, lambda_matrix(2.0, r.diagnostics.hurst_plugin, 2));
  CHECK(given.std_error == doctest::Approx(r.std_error).epsilon(1e-14));
  CHECK(r.diagnostics.regime_high == 0.25);
  const auto r1 = cof_ci(s, 1.5, 0.95);
  CHECK(r1.diagnostics.regime_high == doctest::Approx(1.0 / 6).epsilon(1e-15));
}

TEST_CASE("standard error shrinks at rate sqrt(delta)") {
  const double t = 4.0;
  double ratio = 0;
  const int paths = 4;
  for (int r = 0; r < paths; ++r) {
    const auto coarse = simulate_gaussian_core(spec(-0.3), static_cast<long>(t * 1024) + 1, 1.0 / 1024, 100 + r);
    const auto fine = simulate_gaussian_core(spec(-0.3), static_cast<long>(t * 4096) + 1, 1.0 / 4096, 200 + r);
    ratio += cof_ci(fine, 2.0, 0.95).std_error / cof_ci(coarse, 2.0, 0.95).std_error / paths;
  }
  CHECK(ratio >= 0.4);
  CHECK(ratio <= 0.6);
}

TEST_CASE("gap choice") {
  const auto g = choose_gap(1.0 / 4096, 0.35, 0.6, 16.0);
  CHECK(g.u == 148);
  CHECK(g.kappa_low == doctest::Approx(0.4).epsilon(1e-12));
  CHECK_THROWS_AS(choose_gap(1.0 / 4096, 0.35, 0.35, 16.0), ConfigError);
  CHECK_THROWS_AS(choose_gap(1.0 / 4096, 0.35, 1.0, 16.0), ConfigError);
  for (double kappa : {0.01, 0.3, 0.99}) CHECK_NOTHROW(choose_gap(1.0 / 4096, -0.2, kappa, 1e6));
  CHECK(choose_gap(1.0 / 4096, -0.2, 0.01, 16.0).u == 4);
  CHECK_THROWS_AS(choose_gap(1.0 / 4096, 0.35, 0.6, 0.3), ConfigError);
  // u^{-1} / delta^{4 alpha - 1} decreases towards zero along dyadic delta.
  double prev = 1e300;
  for (int e = 8; e <= 14; ++e) {
    const double delta = std::ldexp(1.0, -e);
    const double q = 1.0 / choose_gap(delta, 0.35, 0.6, 1e6).u / std::pow(delta, 4 * 0.35 - 1);
    CHECK(q < prev);
    prev = q;
  }
  CHECK(prev < 0.2);
}

TEST_CASE("gapped estimator agrees with the plain one in the regular range") {
  const auto s = simulate_gaussian_core(spec(-1.0 / 6), 1 << 18, 1.0 / 4096, 5);
  const auto g = gapped_alpha_ci_auto(s, 2.0, 0.6, 0.95);
  const auto p = alpha_hat(s, 2.0);
  CHECK(std::abs(g.alpha_hat - p.alpha_hat) < 0.03);
  CHECK(g.gap.value() == 148);
  CHECK(g.regime_ok);
  CHECK(g.diagnostics.std_error_unscaled > 0.0);
  CHECK(g.diagnostics.variance_factor == doctest::Approx(2.0 * (1 - 1.0 / 3)).epsilon(1e-14));
  const auto low_p = gapped_alpha_ci(s, 1.5, 148, 0.95);
  CHECK_FALSE(low_p.regime_ok);
}

TEST_CASE("gapped standard error follows sqrt(u delta)") {
  const double t = 16.0;
  const auto a = simulate_gaussian_core(spec(0.35), static_cast<long>(t * 1024) + 1, 1.0 / 1024, 8);
  const auto b = simulate_gaussian_core(spec(0.35), static_cast<long>(t * 4096) + 1, 1.0 / 4096, 9);
  const auto ga = gapped_alpha_ci_auto(a, 2.0, 0.6, 0.95);
  const auto gb = gapped_alpha_ci_auto(b, 2.0, 0.6, 0.95);
  const double r = std::sqrt(gb.gap.value() / 4096.0 / (ga.gap.value() / 1024.0));
  const double observed = gb.std_error / ga.std_error;
  CHECK(observed / r >= 0.9);
  CHECK(observed / r <= 1.1);
}

TEST_CASE("mean alpha_hat over simulated paths") {
  GaussianCoreSimulator sim(spec(-1.0 / 6), (1 << 14) + 1, 1.0 / 4096);
  std::vector<double> a2, a15, a25;
  for (int r = 0; r < 200; ++r) {
    const auto s = sim.sample(13, static_cast<std::uint64_t>(r));
    a2.push_back(alpha_hat(s, 2.0).alpha_hat);
    a15.push_back(alpha_hat(s, 1.5).alpha_hat);
    a25.push_back(alpha_hat(s, 2.5).alpha_hat);
  }
  CHECK(std::abs(mean(a2) + 1.0 / 6) < 0.02);
  CHECK(std::abs(mean(a15) - mean(a25)) < 0.05);
}

TEST_CASE("scan table") {
  const auto s = simulate_gaussian_core(spec(-1.0 / 6), 1 << 16, 1.0 / 4096, 23);
  const auto table = alpha_scan(s, {2.0}, {1, 8, 16, 32, 64, 20000});
  CHECK(table.reference_alpha == doctest::Approx(-1.0 / 6).epsilon(1e-15));
  REQUIRE(table.rows.size() == 6);
  CHECK(table.rows[0].alpha_hat == alpha_hat(s, 2.0).alpha_hat);
  for (int i = 1; i <= 4; ++i) {
    CHECK(table.rows[i].sufficient);
    CHECK(std::abs(table.rows[i].alpha_hat + 1.0 / 6) < 0.05);
  }
  CHECK_FALSE(table.rows[5].sufficient);
  CHECK(std::isnan(table.rows[5].alpha_hat));
  const auto th = thin(s, 3);
  CHECK(th.size() == (s.size() + 2) / 3);
  CHECK(th.values(5) == s.values(15));
  CHECK(th.delta == 3.0 / 4096);
}
