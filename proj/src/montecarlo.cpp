#include "bss/montecarlo.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "bss/errors.hpp"
#include "bss/estimate.hpp"
#include "bss/gaussian.hpp"
#include "bss/rng.hpp"
#include "bss/stats.hpp"
#include "bss/variation.hpp"

namespace bss {
namespace {

struct PathSource {
  std::unique_ptr<GaussianCoreSimulator> core;
  std::unique_ptr<BssSimulator> bss;

  struct Draw {
    SeriesGrid series;
    double integrated_sigma_p = 0.0;
  };

  Draw draw(const McConfig& c, long rep) const {
    Draw d;
    if (core) {
      d.series = core->sample(c.seed, stream_id(static_cast<std::uint64_t>(rep), Component::noise));
      d.integrated_sigma_p = std::pow(c.sigma.level, c.p) * d.series.horizon();
    } else {
      BssPath path = bss->sample(c.seed, static_cast<std::uint64_t>(rep));
      d.integrated_sigma_p = bss->fine_step() * path.sigma.array().pow(c.p).sum();
      d.series = std::move(path.series);
    }
    return d;
  }
};

PathSource make_source(const McConfig& c) {
  PathSource s;
  if (c.sigma.kind == SigmaKind::constant && c.exact_core && c.sigma.level == 1.0)
    s.core = std::make_unique<GaussianCoreSimulator>(c.kernel, c.n, c.delta);
  else
    s.bss = std::make_unique<BssSimulator>(c.kernel, c.sigma, c.n, c.delta, BssOptions{c.oversample, 0.0});
  return s;
}

McReplication estimate_rep(const McConfig& c, const PathSource& src, long rep) {
  McReplication r;
  const auto d = src.draw(c, rep);
  const EstimateReport e = cof_ci(d.series, c.p, c.level);
  r.value = e.alpha_hat;
  r.std_error = e.std_error;
  r.studentized = (e.alpha_hat - c.kernel.alpha) / e.std_error;
  r.covered = e.ci_low <= c.kernel.alpha && c.kernel.alpha <= e.ci_high;
  r.regime_ok = e.regime_ok;
  r.ok = true;
  return r;
}

McReplication gap_rep(const McConfig& c, const PathSource& src, long rep) {
  McReplication r;
  const auto d = src.draw(c, rep);
  const EstimateReport g = gapped_alpha_ci_auto(d.series, c.p, c.kappa, c.level);
  r.value = g.alpha_hat;
  r.std_error = g.std_error;
  r.studentized = (g.alpha_hat - c.kernel.alpha) / g.std_error;
  r.covered = g.ci_low <= c.kernel.alpha && c.kernel.alpha <= g.ci_high;
  r.regime_ok = g.regime_ok;
  r.gap = g.gap.value_or(0);
  const EstimateReport plain = cof_ci(d.series, c.p, c.level);
  r.plain_value = plain.alpha_hat;
  r.plain_std_error = plain.std_error;
  r.plain_covered = plain.ci_low <= c.kernel.alpha && c.kernel.alpha <= plain.ci_high;
  r.ok = true;
  return r;
}

McReplication lln_rep(const McConfig& c, const PathSource& src, const GammaKernel& kernel, long rep) {
  McReplication r;
  const auto d = src.draw(c, rep);
  const PowerVariationResult v = normalized_pv(d.series, c.p, c.k, 1, kernel.tau(c.k, c.delta));
  r.value = v.normalized / (abs_moment(c.p) * d.integrated_sigma_p);
  r.ok = true;
  return r;
}

McReplication lambda_rep(const McConfig& c, long rep) {
  McReplication r;
  const SeriesGrid path = simulate_fbm(c.hurst, c.n, 1.0, c.seed, stream_id(static_cast<std::uint64_t>(rep), Component::noise));
  const double tau = std::sqrt(fbm_filter_covariance(c.hurst, c.k, 1, 1, 0));
  const PowerVariationResult v = power_variation(path, c.p, c.k, 1);
  const double count = static_cast<double>(v.count);
  const double vbar = std::pow(tau, -c.p) * v.raw / count;
  r.value = std::sqrt(count) * (vbar - abs_moment(c.p));
  r.ok = true;
  return r;
}

McReplication degenerate_rep(const McConfig& c, long rep) {
  McReplication r;
  SeriesGrid flat;
  flat.values = Eigen::VectorXd::Constant(c.n, static_cast<double>(rep));
  flat.delta = c.delta;
  r.value = alpha_hat(flat, c.p).alpha_hat;
  r.ok = true;
  return r;
}

}  // namespace

McSummary run_montecarlo(const McConfig& c) {
  if (c.reps < 2) throw ConfigError("Monte Carlo needs at least 2 replications");
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  const std::string& x = c.experiment;
  if (x != "estimate" && x != "gap" && x != "lln" && x != "lambda" && x != "degenerate")
    throw ConfigError("unknown experiment '" + x + "' (expected estimate, gap, lln, lambda or degenerate)");

  PathSource src;
  std::unique_ptr<GammaKernel> kernel;
  if (x == "estimate" || x == "gap" || x == "lln") src = make_source(c);
  if (x == "lln") kernel = std::make_unique<GammaKernel>(c.kernel);

  auto one = [&](long rep) -> McReplication {
    try {
      if (x == "estimate") return estimate_rep(c, src, rep);
      if (x == "gap") return gap_rep(c, src, rep);
      if (x == "lln") return lln_rep(c, src, *kernel, rep);
      if (x == "lambda") return lambda_rep(c, rep);
      return degenerate_rep(c, rep);
    } catch (const DataError& e) {
      McReplication failed;
      failed.error = e.what();
      failed.error_kind = "data";
      return failed;
    } catch (const Error& e) {
      McReplication failed;
      failed.error = e.what();
      failed.error_kind = "numeric";
      return failed;
    }
  };
  McSummary s;
  s.config = c;
  s.reps = c.reps;
  s.replications = parallel_map<McReplication>(c.reps, c.workers, one);

  if (x == "estimate" || x == "gap") s.truth = c.kernel.alpha;
  if (x == "lln") s.truth = 1.0;
  if (x == "lambda") s.truth = 0.0;

  std::vector<double> values, stud, plain_stud;
  CompensatedSum plain_sum;
  long covered = 0, plain_covered = 0;
  CompensatedSum se_sum;
  for (const auto& r : s.replications) {
    if (!r.ok) {
      ++s.failures;
      s.failure_kind = (s.failure_kind.empty() || s.failure_kind == r.error_kind) ? r.error_kind : "numeric";
      if (s.failure_messages.size() < 5) s.failure_messages.push_back(r.error);
      continue;
    }
    values.push_back(r.value);
    if (r.std_error > 0.0) {
      stud.push_back(r.studentized);
      se_sum.add(r.std_error);
    }
    covered += r.covered ? 1 : 0;
    s.regime_flags += r.regime_ok ? 0 : 1;
    if (x == "gap") {
      plain_sum.add(r.plain_value);
      plain_covered += r.plain_covered ? 1 : 0;
      plain_stud.push_back((r.plain_value - c.kernel.alpha) / r.plain_std_error);
    }
  }
  const double ok = static_cast<double>(values.size());
  if (!values.empty()) {
    s.mean = mean(values);
    s.bias = s.mean - s.truth;
    CompensatedSum sq;
    for (double v : values) sq.add((v - s.truth) * (v - s.truth));
    s.rmse = std::sqrt(sq.value() / ok);
    s.variance = sample_variance(values);
    s.coverage = static_cast<double>(covered) / ok;
    if (!stud.empty()) {
      s.ks = ks_distance_normal(stud);
      s.mean_std_error = se_sum.value() / static_cast<double>(stud.size());
    }
    if (x == "gap") {
      s.plain_mean = plain_sum.value() / ok;
      s.plain_coverage = static_cast<double>(plain_covered) / ok;
      s.plain_ks = ks_distance_normal(plain_stud);
    }
  }
  return s;
}

}  // namespace bss
