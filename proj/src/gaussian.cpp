#include "bss/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bss/errors.hpp"
#include "bss/kernel.hpp"

namespace bss {
namespace {

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("Hurst parameter must lie in (0, 1)");
}

// Offsets m = spacing_a * a - spacing_b * b and aggregated weights c_m of the
// product of the two difference filters; cov(lag) = -1/2 sum c_m |lag + m|^{2H}.
struct FilterProduct {
  std::vector<long> offsets;
  std::vector<double> coeffs;
  long reach = 0;
};

FilterProduct filter_product(int k, int spacing_a, int spacing_b) {
  const std::vector<double> w = difference_weights(k);
  FilterProduct fp;
  for (int a = 0; a <= k; ++a) {
    for (int b = 0; b <= k; ++b) {
      const long m = static_cast<long>(spacing_a) * a - static_cast<long>(spacing_b) * b;
      const double c = w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)];
      auto it = std::find(fp.offsets.begin(), fp.offsets.end(), m);
      if (it == fp.offsets.end()) {
        fp.offsets.push_back(m);
        fp.coeffs.push_back(c);
      } else {
        fp.coeffs[static_cast<std::size_t>(it - fp.offsets.begin())] += c;
      }
      fp.reach = std::max(fp.reach, std::labs(m));
    }
  }
  return fp;
}

void check_order(int k, int spacing_a, int spacing_b) {
  if (k < 1) throw DomainError("difference order k must be >= 1");
  if (spacing_a < 1 || spacing_b < 1) throw DomainError("filter spacings must be >= 1");
}

}  // namespace

double abs_moment(double p) {
  if (!(p > 0.0)) throw DomainError("abs_moment requires p > 0");
  return std::exp(0.5 * p * std::numbers::ln2 + std::lgamma(0.5 * (p + 1.0))) / std::sqrt(std::numbers::pi);
}

HermiteExpansion hermite_coeffs(double p, int truncation) {
  if (!(p > 0.0)) throw DomainError("hermite_coeffs requires p > 0");
  if (truncation < 2 || truncation % 2 != 0) throw DomainError("Hermite truncation L must be even and >= 2");

  const double a = 0.5 * (p - 1.0);
  const double mp = abs_moment(p);
  const double scale = 2.0 / std::sqrt(2.0 * std::numbers::pi) * std::pow(2.0, a);

  // b_l = E[|U|^p h_l(U)] for the orthonormal h_l = He_l / sqrt(l!). In y the
  // integrand is y^a e^{-y} times a polynomial of degree l/2, so n >= L/4 + 1
  // nodes are exact; extended precision contains the cancellation between
  // large alternating terms at high order.
  using Real = long double;
  using VectorR = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  using MatrixR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  auto normalized = [&](int nodes) {
    // Golub-Welsch for the generalized Laguerre weight y^a e^{-y}.
    VectorR diag(nodes), sub(nodes - 1);
    for (int i = 0; i < nodes; ++i) diag(i) = 2.0L * i + a + 1.0L;
    for (int i = 1; i < nodes; ++i) sub(i - 1) = std::sqrt(static_cast<Real>(i) * (i + a));
    Eigen::SelfAdjointEigenSolver<MatrixR> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Real mass = std::tgamma(static_cast<Real>(a) + 1.0L);
    VectorR b = VectorR::Zero(truncation + 1);
    for (int i = 0; i < nodes; ++i) {
      const Real weight = mass * solver.eigenvectors()(0, i) * solver.eigenvectors()(0, i);
      const Real x = std::sqrt(2.0L * std::max(solver.eigenvalues()(i), Real(0)));
      Real prev = 1.0L, cur = x;
      b(0) += weight;
      for (int l = 1; l < truncation; ++l) {
        const Real next = (x * cur - std::sqrt(static_cast<Real>(l)) * prev) / std::sqrt(static_cast<Real>(l) + 1.0L);
        prev = cur;
        cur = next;
        if ((l + 1) % 2 == 0) b(l + 1) += weight * cur;
      }
    }
    return Eigen::VectorXd((static_cast<Real>(scale) * b).template cast<double>());
  };

  const int nodes = truncation / 4 + 2;
  const Eigen::VectorXd current = normalized(nodes);
  const Eigen::VectorXd check = normalized(nodes + 8);
  const double change = (check - current).tail(truncation - 1).cwiseAbs().maxCoeff();
  if (change > 1e-10) throw NumericError("hermite_coeffs: quadrature is not stable at this truncation", change);

  HermiteExpansion h;
  h.power = p;
  h.truncation = truncation;
  h.nodes = nodes;
  h.coeffs.assign(static_cast<std::size_t>(truncation) + 1, 0.0);
  h.energy.assign(static_cast<std::size_t>(truncation) + 1, 0.0);
  double explained = 0.0;
  // |x|^p - m_p is even, so only even orders carry weight.
  for (int l = 2; l <= truncation; l += 2) {
    const double bl = current(l);
    h.coeffs[static_cast<std::size_t>(l)] = bl / std::sqrt(std::tgamma(l + 1.0));
    h.energy[static_cast<std::size_t>(l)] = bl * bl;
    explained += bl * bl;
  }
  h.tail_bound = (abs_moment(2.0 * p) - mp * mp) - explained;
  if (h.tail_bound < -1e-8) {
    std::ostringstream msg;
    msg << "hermite_coeffs: sum of l! a_l^2 exceeds Var|U|^p by " << -h.tail_bound;
    throw NumericError(msg.str(), -h.tail_bound);
  }
  return h;
}

double fbm_filter_covariance(double hurst, int k, int spacing_a, int spacing_b, long lag) {
  check_hurst(hurst);
  check_order(k, spacing_a, spacing_b);
  const FilterProduct fp = filter_product(k, spacing_a, spacing_b);
  const double two_h = 2.0 * hurst;
  const long shift = std::labs(lag);
  if (shift <= 4 * fp.reach) {
    double sum = 0.0;
    for (std::size_t i = 0; i < fp.offsets.size(); ++i) {
      const double x = std::abs(static_cast<double>(lag + fp.offsets[i]));
      if (x > 0.0) sum += fp.coeffs[i] * std::pow(x, two_h);
    }
    return -0.5 * sum;
  }
  // |lag + m|^{2H} = |lag|^{2H} sum_r C(2H, r) (m / lag)^r with |m / lag| < 1/4.
  const long double inv = 1.0L / static_cast<long double>(lag);
  long double series = 0.0L;
  long double binom = 1.0L;
  const double ratio = static_cast<double>(fp.reach) / static_cast<double>(shift);
  const int terms = std::min(80, static_cast<int>(std::ceil(-21.0 * std::log(10.0) / std::log(ratio))) + 1);
  for (int r = 0; r <= terms; ++r) {
    // Sum integer moments before scaling so the orders below 2k vanish exactly.
    long double moment = 0.0L;
    for (std::size_t i = 0; i < fp.offsets.size(); ++i)
      moment += static_cast<long double>(fp.coeffs[i]) * std::pow(static_cast<long double>(fp.offsets[i]), r);
    series += binom * moment * std::pow(inv, r);
    binom *= (static_cast<long double>(two_h) - r) / (r + 1);
  }
  return static_cast<double>(-0.5L * std::pow(static_cast<long double>(shift), static_cast<long double>(two_h)) * series);
}

double fbm_filter_covariance_contraction(double hurst, int k, int spacing_a, int spacing_b, long lag) {
  check_hurst(hurst);
  check_order(k, spacing_a, spacing_b);
  const std::vector<double> w = difference_weights(k);
  const long double two_h = 2.0L * hurst;
  auto gamma = [&](long double s, long double t) {
    auto pw = [&](long double x) { return x == 0.0L ? 0.0L : std::pow(std::abs(x), two_h); };
    return 0.5L * (pw(s) + pw(t) - pw(s - t));
  };
  const long base = static_cast<long>(k) * std::max(spacing_a, spacing_b);
  long double sum = 0.0L;
  for (int a = 0; a <= k; ++a)
    for (int b = 0; b <= k; ++b)
      sum += static_cast<long double>(w[static_cast<std::size_t>(a)] * w[static_cast<std::size_t>(b)]) *
             gamma(static_cast<long double>(base - static_cast<long>(spacing_a) * a),
                   static_cast<long double>(base + lag - static_cast<long>(spacing_b) * b));
  return static_cast<double>(sum);
}

double rho_k(double hurst, int k, long j) {
  check_hurst(hurst);
  if (k < 1) throw DomainError("difference order k must be >= 1");
  if (j == 0) return 1.0;
  return fbm_filter_covariance(hurst, k, 1, 1, j) / fbm_filter_covariance(hurst, k, 1, 1, 0);
}

double rho_cross(double hurst, int k, long j) {
  check_hurst(hurst);
  if (k < 1) throw DomainError("difference order k must be >= 1");
  const double v1 = fbm_filter_covariance(hurst, k, 1, 1, 0);
  const double v2 = fbm_filter_covariance(hurst, k, 2, 2, 0);
  return fbm_filter_covariance(hurst, k, 1, 2, j) / std::sqrt(v1 * v2);
}

bool LambdaMatrix::positive_semidefinite(double tol) const {
  const double scale = std::max({std::abs(entries(0, 0)), std::abs(entries(1, 1)), 1.0});
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(entries, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -tol * scale;
}

LambdaMatrix lambda_matrix(double p, double hurst, int k, int truncation, long max_lag) {
  check_hurst(hurst);
  if (k < 1) throw DomainError("difference order k must be >= 1");
  if (k == 1 && hurst >= 0.75) {
    std::ostringstream msg;
    msg << "lambda_matrix: correlations are not square summable for (k=" << k << ", H=" << hurst
        << "); first-order differences need H < 3/4";
    throw RegimeError(msg.str());
  }
  if (max_lag < 1) throw DomainError("max_lag must be >= 1");

  const HermiteExpansion herm = hermite_coeffs(p, truncation);
  const int orders = truncation / 2;  // l = 2, 4, ..., L
  std::vector<double> energy(static_cast<std::size_t>(orders));
  for (int i = 0; i < orders; ++i) energy[static_cast<std::size_t>(i)] = herm.energy[static_cast<std::size_t>(2 * i + 2)];

  const double var1 = fbm_filter_covariance(hurst, k, 1, 1, 0);
  const double var2 = fbm_filter_covariance(hurst, k, 2, 2, 0);
  const double cross_norm = std::sqrt(var1 * var2);

  // sums[s][i] = sum over lags of rho^{2i+2}; s = 0: spacing-1 (j >= 1),
  // s = 1: spacing-2 (j >= 1), s = 2: cross (all integer j).
  std::vector<std::vector<double>> sums(3, std::vector<double>(static_cast<std::size_t>(orders), 0.0));
  auto accumulate = [&](std::vector<double>& acc, double rho) {
    const double r2 = rho * rho;
    double pw = r2;
    for (int i = 0; i < orders; ++i) {
      acc[static_cast<std::size_t>(i)] += pw;
      pw *= r2;
      if (pw == 0.0) break;
    }
  };
  accumulate(sums[2], fbm_filter_covariance(hurst, k, 1, 2, 0) / cross_norm);

  // rho(j)^2 ~ C j^{-beta} for large j.
  const double beta = 4.0 * (k - hurst);
  auto tail_of = [&](double rho, long j, int l) {
    const double decay = 0.5 * l * beta;
    return std::pow(std::abs(rho), l) * (static_cast<double>(j) + 0.5) / (decay - 1.0);
  };

  long j = 1;
  double last[4] = {0, 0, 0, 0};
  for (; j <= max_lag; ++j) {
    last[0] = fbm_filter_covariance(hurst, k, 1, 1, j) / var1;
    last[1] = fbm_filter_covariance(hurst, k, 2, 2, j) / var2;
    last[2] = fbm_filter_covariance(hurst, k, 1, 2, j) / cross_norm;
    last[3] = fbm_filter_covariance(hurst, k, 1, 2, -j) / cross_norm;
    accumulate(sums[0], last[0]);
    accumulate(sums[1], last[1]);
    accumulate(sums[2], last[2]);
    accumulate(sums[2], last[3]);
    // Past a few thousand lags the power-law tail formula is accurate to
    // O(j^-2) relative, so the explicit sum can stop there.
    if (j >= 4096) break;
    if (j >= 64) {
      const double worst = std::max({tail_of(last[0], j, 2), tail_of(last[1], j, 2), tail_of(last[2], j, 2),
                                     tail_of(last[3], j, 2)});
      if (worst < 1e-15) break;
    }
  }
  const long used = std::min(j, max_lag);

  LambdaMatrix out;
  out.power = p;
  out.hurst = hurst;
  out.order = k;
  out.truncation = truncation;
  out.max_lag = used;
  out.hermite_tail = std::max(herm.tail_bound, 0.0);

  double l11 = 0.0, l22 = 0.0, l12 = 0.0, tail = 0.0;
  for (int i = 0; i < orders; ++i) {
    const int l = 2 * i + 2;
    const double t11 = tail_of(last[0], used, l);
    const double t22 = tail_of(last[1], used, l);
    const double t12 = tail_of(last[2], used, l) + tail_of(last[3], used, l);
    const double e = energy[static_cast<std::size_t>(i)];
    l11 += e * (1.0 + 2.0 * (sums[0][static_cast<std::size_t>(i)] + t11));
    l22 += e * (1.0 + 2.0 * (sums[1][static_cast<std::size_t>(i)] + t22));
    l12 += e * (sums[2][static_cast<std::size_t>(i)] + t12);
    tail += e * (2.0 * t11 + 2.0 * t22 + t12);
  }
  // Orders above L: only the j = 0 term (rho = 1) survives at working precision.
  l11 += out.hermite_tail;
  l22 += out.hermite_tail;
  out.lag_tail = tail;
  out.entries << l11, l12, l12, l22;
  return out;
}

}  // namespace bss
