// Command-line front end: simulate, estimate, spectrum, scan, montecarlo.
//
// Every option lives on the top-level command so that one flat key = value
// file (--config) can drive any subcommand; flags given on the command line
// override the file.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bss/errors.hpp"
#include "bss/estimate.hpp"
#include "bss/io.hpp"
#include "bss/kernel.hpp"
#include "bss/montecarlo.hpp"
#include "bss/simulate.hpp"
#include "bss/spectral.hpp"
#include "bss/stats.hpp"

namespace {

using nlohmann::json;

enum Exit : int { kOk = 0, kConfig = 2, kData = 3, kNumeric = 4 };

struct Options {
  // kernel and sigma
  double alpha = -1.0 / 6.0;
  double lambda = 1.0;
  double quad_tol = 1e-10;
  std::string sigma = "constant";
  double sigma_level = 1.0;
  double volvol = 0.5;
  double mean_reversion = 1.0;
  double smoothing = 2.0;
  // grid and randomness
  std::uint64_t seed = 1;
  long n = 1 << 16;
  double delta = 1.0 / 4096.0;
  double rate = 0.0;
  // simulate
  std::string model = "bss";
  double hurst = 0.5;
  int oversample = 8;
  double burn_in = 0.0;
  // data
  std::string input;
  std::string output;
  std::string format = "csv";
  bool standardize = false;
  // estimation
  double p = 2.0;
  std::string method = "plain";
  double level = 0.95;
  double kappa = 0.6;
  int gap = 0;
  // spectrum
  long segment = 1 << 16;
  double overlap = 0.5;
  std::string taper = "hann";
  double f_min = 0.0;
  double f_max = 0.0;
  // scan
  std::vector<double> powers{1.0, 2.0, 3.0};
  std::vector<long> lags{1, 2, 4, 8, 16, 32, 64, 128};
  // montecarlo
  std::string experiment = "estimate";
  long reps = 100;
  int workers = 1;
  int k = 2;
  bool exact_core = true;
  // outputs
  std::string report;
  std::string csv;
  std::string svg;
};

bss::KernelSpec kernel_of(const Options& o) {
  bss::KernelSpec s{o.alpha, o.lambda, o.quad_tol};
  s.validate();
  return s;
}

bss::SigmaModel sigma_of(const Options& o) {
  bss::SigmaModel m;
  m.kind = bss::parse_sigma_kind(o.sigma);
  m.level = o.sigma_level;
  m.volvol = o.volvol;
  m.mean_reversion = o.mean_reversion;
  m.smoothing = o.smoothing;
  m.validate();
  return m;
}

double delta_of(const Options& o) { return o.rate > 0.0 ? bss::delta_from_rate(o.rate) : o.delta; }

json echo(const std::string& command, const Options& o) {
  json j{{"seed", o.seed}};
  auto kernel = [&] { j["kernel"] = json{{"alpha", o.alpha}, {"lambda", o.lambda}, {"quad_tol", o.quad_tol}}; };
  auto sigma = [&] {
    j["sigma"] = json{{"kind", o.sigma},
                      {"level", o.sigma_level},
                      {"volvol", o.volvol},
                      {"mean_reversion", o.mean_reversion},
                      {"smoothing", o.smoothing}};
  };
  auto data = [&] {
    j["input"] = o.input;
    j["format"] = o.format;
    j["delta"] = delta_of(o);
    j["standardize"] = o.standardize;
  };
  if (command == "simulate") {
    kernel();
    sigma();
    j.update({{"model", o.model}, {"n", o.n}, {"delta", delta_of(o)}, {"hurst", o.hurst}, {"oversample", o.oversample},
              {"burn_in", o.burn_in}, {"output", o.output}, {"format", o.format}});
  } else if (command == "estimate") {
    data();
    j.update({{"p", o.p}, {"method", o.method}, {"level", o.level}, {"kappa", o.kappa}, {"gap", o.gap}});
  } else if (command == "spectrum") {
    data();
    j.update({{"segment", o.segment}, {"overlap", o.overlap}, {"taper", o.taper}, {"f_min", o.f_min}, {"f_max", o.f_max}});
  } else if (command == "scan") {
    data();
    j.update({{"powers", o.powers}, {"lags", o.lags}});
  } else {
    kernel();
    sigma();
    j.update({{"experiment", o.experiment}, {"reps", o.reps}, {"n", o.n}, {"delta", delta_of(o)}, {"p", o.p},
              {"k", o.k}, {"level", o.level}, {"kappa", o.kappa}, {"oversample", o.oversample}, {"hurst", o.hurst},
              {"exact_core", o.exact_core}});
  }
  return j;
}

bss::SeriesGrid load(const Options& o) {
  if (o.input.empty()) throw bss::ConfigError("--input is required");
  return bss::ingest_series(o.input, bss::parse_series_format(o.format), delta_of(o), o.standardize);
}

int run_simulate(const Options& o, bss::Report& rep) {
  const double delta = delta_of(o);
  bss::SeriesGrid s;
  json res;
  if (o.model == "fbm") {
    s = bss::simulate_fbm(o.hurst, o.n, delta, o.seed);
  } else if (o.model == "core") {
    s = bss::simulate_gaussian_core(kernel_of(o), o.n, delta, o.seed);
  } else if (o.model == "sigma") {
    s = bss::simulate_sigma(sigma_of(o), o.n, delta, o.seed);
  } else if (o.model == "bss") {
    const bss::BssSimulator sim(kernel_of(o), sigma_of(o), o.n, delta, {o.oversample, o.burn_in});
    bss::BssPath path = sim.sample(o.seed, 0);
    res["integrated_sigma2"] = path.integrated_sigma2;
    res["burn_in"] = sim.burn_in();
    s = std::move(path.series);
  } else {
    throw bss::ConfigError("unknown model '" + o.model + "' (expected fbm, core, sigma or bss)");
  }
  if (o.output.empty()) throw bss::ConfigError("--output is required for simulate");
  bss::export_series(s, o.output, bss::parse_series_format(o.format));
  std::vector<double> v(s.values.data(), s.values.data() + s.size());
  res.update({{"length", s.size()}, {"delta", s.delta}, {"mean", bss::mean(v)},
              {"variance", bss::sample_variance(v)}, {"output", o.output}});
  rep.results = res;
  return kOk;
}

int run_estimate(const Options& o, bss::Report& rep) {
  const bss::SeriesGrid s = load(o);
  bss::EstimateReport e;
  if (o.method == "point")
    e = bss::alpha_hat(s, o.p);
  else if (o.method == "plain")
    e = bss::cof_ci(s, o.p, o.level);
  else if (o.method == "gapped")
    e = o.gap > 0 ? bss::gapped_alpha_ci(s, o.p, o.gap, o.level) : bss::gapped_alpha_ci_auto(s, o.p, o.kappa, o.level);
  else
    throw bss::ConfigError("unknown method '" + o.method + "' (expected point, plain or gapped)");
  rep.results = bss::to_json(e);
  rep.warnings.insert(rep.warnings.end(), e.warnings.begin(), e.warnings.end());
  std::cout << "alpha_hat = " << e.alpha_hat;
  if (e.method != "point") std::cout << "  " << e.level * 100 << "% CI [" << e.ci_low << ", " << e.ci_high << "]";
  std::cout << '\n';
  return e.regime_ok ? kOk : kNumeric;
}

int run_spectrum(const Options& o, bss::Report& rep) {
  const bss::SeriesGrid s = load(o);
  const bss::PsdEstimate psd = bss::welch_psd(s, std::min<long>(o.segment, s.size() / 2), o.overlap,
                                              bss::parse_taper(o.taper));
  const double nyquist = 0.5 / s.delta;
  const double f_max = o.f_max > 0.0 ? o.f_max : nyquist / 8.0;
  const bss::SpectrumFit fit = bss::fit_spectrum(psd, o.f_min, f_max);
  rep.results = {{"fit", bss::to_json(fit)},
                 {"segments", psd.segments},
                 {"segment_len", psd.segment_len},
                 {"fft_len", psd.fft_len},
                 {"total_power", psd.total_power()},
                 {"f_min_note", "lowest 3 nonzero bins excluded unless f_min is given"}};
  if (!fit.alpha_in_range) rep.warnings.push_back("fitted alpha outside (-1/2, 1/2)");
  if (!o.csv.empty()) bss::emit_csv(bss::psd_csv(psd), o.csv);
  if (!o.svg.empty()) {
    bss::SvgSeries obs{"Welch estimate", {}, {}}, model{"fit", {}, {}};
    for (Eigen::Index i = 1; i < psd.freqs.size(); ++i) {
      obs.x.push_back(psd.freqs(i));
      obs.y.push_back(psd.density(i));
      if (psd.freqs(i) <= f_max && psd.freqs(i) >= fit.f_min) {
        model.x.push_back(psd.freqs(i));
        model.y.push_back(std::exp(bss::log_spectral_model(psd.freqs(i), fit.alpha, fit.lambda, fit.log_const)));
      }
    }
    bss::emit_svg({obs, model}, o.svg, "Spectral density", "frequency", "density", true, true);
  }
  std::cout << "alpha = " << fit.alpha << "  lambda = " << fit.lambda << "  slope = " << -2.0 * (1.0 + fit.alpha)
            << '\n';
  return kOk;
}

int run_scan(const Options& o, bss::Report& rep) {
  const bss::SeriesGrid s = load(o);
  const bss::ScanTable t = bss::alpha_scan(s, o.powers, o.lags);
  rep.results = bss::to_json(t);
  for (const auto& r : t.rows)
    if (!r.sufficient)
      rep.warnings.push_back("insufficient data for p = " + bss::format_double(r.p) +
                             ", lag multiplier " + std::to_string(r.lag_multiplier));
  if (!o.csv.empty()) bss::emit_csv(bss::scan_csv(t), o.csv);
  if (!o.svg.empty()) {
    std::vector<bss::SvgSeries> lines;
    for (double p : o.powers) {
      bss::SvgSeries line{"p = " + bss::format_double(p), {}, {}};
      for (const auto& r : t.rows)
        if (r.p == p && r.sufficient) {
          line.x.push_back(static_cast<double>(r.lag_multiplier) * s.delta);
          line.y.push_back(r.alpha_hat);
        }
      lines.push_back(line);
    }
    bss::SvgSeries ref{"alpha = -1/6", {}, {}};
    for (long m : o.lags) {
      ref.x.push_back(static_cast<double>(m) * s.delta);
      ref.y.push_back(t.reference_alpha);
    }
    lines.push_back(ref);
    bss::emit_svg(lines, o.svg, "alpha_hat against lag", "lag", "alpha_hat", true, false);
  }
  const bss::CsvTable table = bss::scan_csv(t);
  std::cout << "p,lag_multiplier,alpha_hat,count\n";
  for (const auto& r : table.rows) std::cout << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << '\n';
  return kOk;
}

int run_montecarlo(const Options& o, bss::Report& rep) {
  bss::McConfig c;
  c.experiment = o.experiment;
  c.kernel = kernel_of(o);
  c.sigma = sigma_of(o);
  c.n = o.n;
  c.delta = delta_of(o);
  c.reps = o.reps;
  c.seed = o.seed;
  c.workers = o.workers;
  c.p = o.p;
  c.k = o.k;
  c.level = o.level;
  c.kappa = o.kappa;
  c.oversample = o.oversample;
  c.exact_core = o.exact_core;
  c.hurst = o.hurst;
  const bss::McSummary s = bss::run_montecarlo(c);
  rep.results = bss::to_json(s);
  if (s.failures > 0)
    rep.warnings.push_back(std::to_string(s.failures) + " of " + std::to_string(s.reps) + " replications failed");
  if (s.regime_flags > 0)
    rep.warnings.push_back(std::to_string(s.regime_flags) + " replications flagged an invalid regime");
  std::cout << rep.results.dump(2) << '\n';
  if (s.failures == 0) return kOk;
  return s.failure_kind == "data" ? kData : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brownian semi-stationary processes: simulation and smoothness estimation"};
  app.set_config("--config", "", "Read options from a key = value file");
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  app.add_option("--alpha", o.alpha, "Kernel smoothness alpha")->capture_default_str();
  app.add_option("--lambda", o.lambda, "Kernel decay rate lambda")->capture_default_str();
  app.add_option("--quad-tol", o.quad_tol, "Relative quadrature tolerance")->capture_default_str();
  app.add_option("--sigma", o.sigma, "Intermittency model: constant, exp-ou, smooth-exp-ou")->capture_default_str();
  app.add_option("--sigma-level", o.sigma_level, "Level of sigma")->capture_default_str();
  app.add_option("--volvol", o.volvol, "Stationary standard deviation of log sigma")->capture_default_str();
  app.add_option("--mean-reversion", o.mean_reversion, "Mean reversion rate of log sigma")->capture_default_str();
  app.add_option("--smoothing", o.smoothing, "Rate of the smoothing driver (smooth-exp-ou)")->capture_default_str();
  app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
  app.add_option("-n,--n", o.n, "Number of observations")->capture_default_str();
  app.add_option("--delta", o.delta, "Grid step")->capture_default_str();
  app.add_option("--rate", o.rate, "Sampling rate in Hz (sets delta = 1 / rate)");
  app.add_option("--model", o.model, "simulate: fbm, core, sigma or bss")->capture_default_str();
  app.add_option("--hurst", o.hurst, "Hurst index for fBm")->capture_default_str();
  app.add_option("--oversample", o.oversample, "Fine steps per grid step in the BSS simulation")->capture_default_str();
  app.add_option("--burn-in", o.burn_in, "Kernel truncation horizon (0: automatic)")->capture_default_str();
  app.add_option("-i,--input", o.input, "Input series");
  app.add_option("-o,--output", o.output, "Output series (simulate)");
  app.add_option("--format", o.format, "Series format: csv or raw (little-endian float64)")->capture_default_str();
  app.add_flag("--standardize", o.standardize, "Standardize the input to zero mean and unit variance");
  app.add_option("-p,--p", o.p, "Power p")->capture_default_str();
  app.add_option("--method", o.method, "estimate: point, plain or gapped")->capture_default_str();
  app.add_option("--level", o.level, "Confidence level")->capture_default_str();
  app.add_option("--kappa", o.kappa, "Gap exponent, u = ceil(delta^-kappa)")->capture_default_str();
  app.add_option("--gap", o.gap, "Explicit gap u (overrides kappa)");
  app.add_option("--segment", o.segment, "Welch segment length")->capture_default_str();
  app.add_option("--overlap", o.overlap, "Welch overlap fraction")->capture_default_str();
  app.add_option("--taper", o.taper, "Taper: hann or none")->capture_default_str();
  app.add_option("--f-min", o.f_min, "Lower fit frequency (0: skip the lowest 3 bins)");
  app.add_option("--f-max", o.f_max, "Upper fit frequency (0: Nyquist / 8)");
  app.add_option("--powers", o.powers, "scan: powers p")->delimiter(',');
  app.add_option("--lags", o.lags, "scan: lag multipliers")->delimiter(',');
  app.add_option("--experiment", o.experiment, "montecarlo: estimate, gap, lln, lambda, degenerate")
      ->capture_default_str();
  app.add_option("--reps", o.reps, "Replications")->capture_default_str();
  app.add_option("--workers", o.workers, "Worker threads")->capture_default_str();
  app.add_option("-k,--k", o.k, "Difference order (lln, lambda)")->capture_default_str();
  app.add_flag("!--no-exact-core", o.exact_core, "Simulate constant sigma with the BSS scheme instead of the exact core");
  app.add_option("--report", o.report, "JSON report path");
  app.add_option("--csv", o.csv, "CSV table path (spectrum, scan)");
  app.add_option("--svg", o.svg, "SVG chart path (spectrum, scan)");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Simulate fBm, the Gaussian core, sigma or a BSS path"},
      {"estimate", "Estimate alpha with a plain or gapped confidence interval"},
      {"spectrum", "Welch spectral density and model fit"},
      {"scan", "alpha_hat over powers and lag multipliers"},
      {"montecarlo", "Monte Carlo experiment"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  bss::Report rep;
  rep.command = command;
  rep.config = echo(command, o);
  const auto start = std::chrono::steady_clock::now();
  int code = kOk;
  try {
    if (command == "simulate") code = run_simulate(o, rep);
    if (command == "estimate") code = run_estimate(o, rep);
    if (command == "spectrum") code = run_spectrum(o, rep);
    if (command == "scan") code = run_scan(o, rep);
    if (command == "montecarlo") code = run_montecarlo(o, rep);
  } catch (const bss::ConfigError& e) {
    rep.warnings.push_back(std::string("configuration error: ") + e.what());
    code = kConfig;
  } catch (const bss::DomainError& e) {
    rep.warnings.push_back(std::string("configuration error: ") + e.what());
    code = kConfig;
  } catch (const bss::DataError& e) {
    rep.warnings.push_back(std::string("data error: ") + e.what());
    code = kData;
  } catch (const bss::IoError& e) {
    rep.warnings.push_back(std::string("i/o error: ") + e.what());
    code = kData;
  } catch (const bss::NumericError& e) {
    rep.warnings.push_back(std::string("numeric error: ") + e.what());
    code = kNumeric;
  } catch (const bss::RegimeError& e) {
    rep.warnings.push_back(std::string("regime error: ") + e.what());
    code = kNumeric;
  }
  rep.timing = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
                {"workers", o.workers}};
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  if (!o.report.empty()) {
    try {
      bss::emit_report(rep, o.report);
    } catch (const bss::IoError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kData;
    }
  }
  return code;
}
