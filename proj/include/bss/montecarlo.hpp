#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "bss/kernel.hpp"
#include "bss/simulate.hpp"

namespace bss {

/// Runs f(rep) for rep = 0..reps-1 on `workers` threads and returns the
/// results indexed by replication, so any reduction over them is independent
/// of scheduling. Replications are dealt round-robin. Exceptions escaping f
/// are rethrown after all workers joined.
template <typename R, typename F>
std::vector<R> parallel_map(long reps, int workers, F&& f) {
  std::vector<R> out(static_cast<std::size_t>(std::max(reps, 0L)));
  const int w = static_cast<int>(std::clamp<long>(workers, 1, std::max(reps, 1L)));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  auto body = [&](int id) {
    try {
      for (long r = id; r < reps; r += w) out[static_cast<std::size_t>(r)] = f(r);
    } catch (...) {
      errors[static_cast<std::size_t>(id)] = std::current_exception();
    }
  };
  if (w == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    for (int id = 0; id < w; ++id) pool.emplace_back(body, id);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Monte Carlo experiments:
///  - "estimate": plain alpha_hat and its interval per path;
///  - "gap": gapped (two-stage, kappa) and plain intervals on the same paths;
///  - "lln": normalized power variation against m_p int sigma^p;
///  - "lambda": sqrt(count) (Vbar - m_p) on fBm paths, whose variance is lambda^{11};
///  - "degenerate": constant paths, every replication must fail.
struct McConfig {
  std::string experiment = "estimate";
  KernelSpec kernel;
  SigmaModel sigma;
  long n = 1 << 16;
  double delta = 1.0 / 4096.0;
  long reps = 100;
  std::uint64_t seed = 1;
  int workers = 1;
  double p = 2.0;
  int k = 2;
  double level = 0.95;
  double kappa = 0.6;
  int oversample = 8;
  /// Constant sigma is simulated with the exact Gaussian core unless false.
  bool exact_core = true;
  /// Hurst index for the "lambda" experiment.
  double hurst = 0.5;
};

struct McReplication {
  bool ok = false;
  std::string error;
  /// "data" for data errors (degenerate paths), "numeric" otherwise.
  std::string error_kind;
  /// Primary estimate: alpha_hat ("estimate", gapped one for "gap"), the
  /// normalized ratio ("lln") or sqrt(count)(Vbar - m_p) ("lambda").
  double value = 0.0;
  double std_error = 0.0;
  /// (value - truth) / std_error.
  double studentized = 0.0;
  bool covered = false;
  bool regime_ok = true;
  /// "gap" only: the plain interval on the same path.
  double plain_value = 0.0;
  double plain_std_error = 0.0;
  bool plain_covered = false;
  int gap = 0;
};

struct McSummary {
  McConfig config;
  long reps = 0;
  long failures = 0;
  /// "data" when every failure was a data error, else "numeric".
  std::string failure_kind;
  std::vector<std::string> failure_messages;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double variance = 0.0;
  double coverage = 0.0;
  double ks = 0.0;
  double mean_std_error = 0.0;
  long regime_flags = 0;
  double plain_mean = 0.0;
  double plain_coverage = 0.0;
  double plain_ks = 0.0;
  std::vector<McReplication> replications;
};

/// Runs one experiment. Replication r draws from streams stream_id(r, .) of
/// the master seed, so the result does not depend on `workers`. Failures of
/// single replications are counted, not fatal.
McSummary run_montecarlo(const McConfig& config);

}  // namespace bss
