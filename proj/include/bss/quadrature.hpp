#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace bss::quad {

/// Outcome of an adaptive integration. `error` is the Kronrod error estimate
/// summed over all retained subintervals.
struct Result {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the nodes kKronrodNodes[1], [3], [5], [7].
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
};

template <typename F>
Segment kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 7> lo{}, hi{};
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double abs_sum = std::abs(fc) * kKronrodWeights[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    lo[j] = f(center - dx);
    hi[j] = f(center + dx);
    const double sum = lo[j] + hi[j];
    kronrod += kKronrodWeights[j] * sum;
    abs_sum += kKronrodWeights[j] * (std::abs(lo[j]) + std::abs(hi[j]));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  // QUADPACK qk15 error heuristic.
  const double mean = 0.5 * kronrod;
  double asc = kKronrodWeights[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) asc += kKronrodWeights[j] * (std::abs(lo[j] - mean) + std::abs(hi[j] - mean));
  asc *= std::abs(half);
  const double value = kronrod * half;
  double error = std::abs((kronrod - gauss) * half);
  if (asc != 0.0 && error != 0.0) error = asc * std::min(1.0, std::pow(200.0 * error / asc, 1.5));
  const double abs_value = abs_sum * std::abs(half);
  if (abs_value > 1e-290) error = std::max(50.0 * 2.220446049250313e-16 * abs_value, error);
  return {a, b, value, error};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b].
/// Bisects the interval with the largest error until
/// error <= max(abs_tol, rel_tol * |value|) or the subdivision budget is spent.
template <typename F>
Result integrate(F&& f, double a, double b, double abs_tol, double rel_tol, int max_subdivisions = 400) {
  std::vector<detail::Segment> heap;
  heap.reserve(static_cast<std::size_t>(max_subdivisions) + 1);
  auto by_error = [](const detail::Segment& x, const detail::Segment& y) { return x.error < y.error; };
  heap.push_back(detail::kronrod15(f, a, b));
  double value = heap.front().value;
  double error = heap.front().error;
  int splits = 0;
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) && splits < max_subdivisions) {
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const detail::Segment worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {  // interval exhausted in floating point
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), by_error);
      break;
    }
    const detail::Segment left = detail::kronrod15(f, worst.a, mid);
    const detail::Segment right = detail::kronrod15(f, mid, worst.b);
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), by_error);
    ++splits;
    value = 0.0;
    error = 0.0;
    for (const auto& s : heap) {
      value += s.value;
      error += s.error;
    }
  }
  return {value, error, splits, error <= std::max(abs_tol, rel_tol * std::abs(value))};
}

/// Integrates f over [0, a] when f(u) ~ u^beta near zero (beta > -1) by the
/// substitution u = a s^m, m = 1/(1 + beta), which turns the leading power
/// into a constant.
template <typename F>
Result integrate_power_singular(F&& f, double a, double beta, double abs_tol, double rel_tol,
                                int max_subdivisions = 400) {
  const double m = 1.0 / (1.0 + beta);
  auto g = [&](double s) {
    const double u = a * std::pow(s, m);
    if (u <= 0.0) return 0.0;
    return f(u) * a * m * std::pow(s, m - 1.0);
  };
  return integrate(g, 0.0, 1.0, abs_tol, rel_tol, max_subdivisions);
}

}  // namespace bss::quad
