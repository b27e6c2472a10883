#include "bss/simulate.hpp"

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "bss/errors.hpp"
#include "bss/quadrature.hpp"
#include "bss/rng.hpp"

namespace bss {
namespace {

using cvec = std::vector<std::complex<double>>;

// kissfft plans are mutable, so every thread keeps its own engine.
Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

long next_pow2(long x) {
  long m = 1;
  while (m < x) m <<= 1;
  return m;
}

void check_length(long n, long minimum, const char* what) {
  if (n < minimum) {
    std::ostringstream msg;
    msg << what << ": length must be >= " << minimum;
    throw DomainError(msg.str());
  }
}

}  // namespace

void SeriesGrid::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("series grid step must be positive and finite");
  if (values.size() < 1) throw DomainError("series is empty");
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values(i))) {
      std::ostringstream msg;
      msg << "series value at index " << i << " is not finite";
      throw DomainError(msg.str());
    }
  }
}

std::string to_string(SigmaKind kind) {
  switch (kind) {
    case SigmaKind::constant:
      return "constant";
    case SigmaKind::exp_ou:
      return "exp-ou";
    case SigmaKind::smooth_exp_ou:
      return "smooth-exp-ou";
  }
  return "constant";
}

SigmaKind parse_sigma_kind(const std::string& name) {
  if (name == "constant") return SigmaKind::constant;
  if (name == "exp-ou") return SigmaKind::exp_ou;
  if (name == "smooth-exp-ou") return SigmaKind::smooth_exp_ou;
  throw ConfigError("unknown sigma model '" + name + "' (expected constant, exp-ou or smooth-exp-ou)");
}

void SigmaModel::validate() const {
  if (!(level > 0.0) || !std::isfinite(level)) throw DomainError("sigma level must be positive");
  if (kind == SigmaKind::constant) return;
  if (!(volvol >= 0.0) || !std::isfinite(volvol)) throw DomainError("sigma volvol must be >= 0");
  if (!(mean_reversion > 0.0)) throw DomainError("sigma mean_reversion must be positive");
  if (kind == SigmaKind::smooth_exp_ou && !(smoothing > 0.0)) throw DomainError("sigma smoothing rate must be positive");
}

CirculantGaussian::CirculantGaussian(const std::function<double(long)>& covariance, long n, long max_size) : n_(n) {
  check_length(n, 1, "circulant embedding");
  long m = std::max(2L, next_pow2(2 * (n - 1)));
  std::vector<double> lags;
  for (;;) {
    const long half = m / 2;
    while (static_cast<long>(lags.size()) <= half) lags.push_back(covariance(static_cast<long>(lags.size())));
    cvec row(static_cast<std::size_t>(m));
    for (long j = 0; j < m; ++j) row[static_cast<std::size_t>(j)] = lags[static_cast<std::size_t>(j <= half ? j : m - j)];
    cvec eig;
    fft_engine().fwd(eig, row);
    double top = 0.0, low = 0.0, negative = 0.0;
    for (const auto& e : eig) {
      top = std::max(top, e.real());
      low = std::min(low, e.real());
      if (e.real() < 0.0) negative -= e.real();
    }
    if (!(top > 0.0)) throw NumericError("circulant embedding: covariance has no positive spectrum", top);
    if (low >= -1e-8 * top) {
      sqrt_eig_.resize(m);
      for (long j = 0; j < m; ++j)
        sqrt_eig_(j) = std::sqrt(std::max(eig[static_cast<std::size_t>(j)].real(), 0.0) / static_cast<double>(m));
      clipped_ = negative / top;
      return;
    }
    if (2 * m > max_size) {
      std::ostringstream msg;
      msg << "circulant embedding is not nonnegative definite up to size " << m;
      throw NumericError(msg.str(), -low / top);
    }
    m *= 2;
  }
}

Eigen::VectorXd CirculantGaussian::sample(std::uint64_t seed, std::uint64_t stream) const {
  const long m = embedding_size();
  NormalStream normal(seed, stream);
  cvec in(static_cast<std::size_t>(m));
  for (long j = 0; j < m; ++j) {
    const double re = normal();
    const double im = normal();
    in[static_cast<std::size_t>(j)] = sqrt_eig_(j) * std::complex<double>(re, im);
  }
  cvec out;
  fft_engine().fwd(out, in);
  Eigen::VectorXd path(n_);
  for (long j = 0; j < n_; ++j) path(j) = out[static_cast<std::size_t>(j)].real();
  return path;
}

double fgn_covariance(double hurst, long j) {
  const double two_h = 2.0 * hurst;
  const double x = static_cast<double>(std::labs(j));
  auto pw = [&](double v) { return v == 0.0 ? 0.0 : std::pow(v, two_h); };
  return 0.5 * (pw(x + 1.0) - 2.0 * pw(x) + pw(std::abs(x - 1.0)));
}

SeriesGrid simulate_fbm(double hurst, long n, double delta, std::uint64_t seed, std::uint64_t stream) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("Hurst parameter must lie in (0, 1)");
  check_length(n, 2, "simulate_fbm");
  if (!(delta > 0.0)) throw DomainError("grid step must be positive");
  const CirculantGaussian noise([hurst](long j) { return fgn_covariance(hurst, j); }, n - 1);
  const Eigen::VectorXd inc = noise.sample(seed, stream) * std::pow(delta, hurst);
  SeriesGrid out;
  out.values.resize(n);
  out.values(0) = 0.0;
  for (long i = 1; i < n; ++i) out.values(i) = out.values(i - 1) + inc(i - 1);
  out.delta = delta;
  out.meta = {"simulated", seed, "fbm"};
  return out;
}

GaussianCoreSimulator::GaussianCoreSimulator(const KernelSpec& spec, long n, double delta)
    : spec_(spec), kernel_(spec, 0), n_(n), delta_(delta) {
  spec.validate();
  check_length(n, 2, "simulate_gaussian_core");
  if (!(delta > 0.0)) throw DomainError("grid step must be positive");
  const GammaKernel& k = kernel_;
  embedding_ = std::make_shared<const CirculantGaussian>(
      [&k, delta](long j) { return k.autocovariance(static_cast<double>(j) * delta); }, n);
}

SeriesGrid GaussianCoreSimulator::sample(std::uint64_t seed, std::uint64_t stream) const {
  SeriesGrid out;
  out.values = embedding_->sample(seed, stream);
  out.delta = delta_;
  out.meta = {"simulated", seed, "gaussian-core"};
  return out;
}

SeriesGrid simulate_gaussian_core(const KernelSpec& spec, long n, double delta, std::uint64_t seed) {
  return GaussianCoreSimulator(spec, n, delta).sample(seed, stream_id(0, Component::noise));
}

namespace {

// log sigma - log level on n points, stationary start.
Eigen::VectorXd log_sigma_path(const SigmaModel& model, long n, double delta, NormalStream& normal) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  if (model.kind == SigmaKind::constant || model.volvol == 0.0) return z;
  if (model.kind == SigmaKind::exp_ou) {
    const double phi = std::exp(-model.mean_reversion * delta);
    const double innov = model.volvol * std::sqrt(-std::expm1(-2.0 * model.mean_reversion * delta));
    z(0) = model.volvol * normal();
    for (long i = 1; i < n; ++i) z(i) = phi * z(i - 1) + innov * normal();
    return z;
  }
  // (Z, Y) with drift [[-a, 1], [0, -b]] and noise on Y only, scaled so that
  // the stationary standard deviation of Z is volvol.
  const double a = model.mean_reversion, b = model.smoothing;
  const double s2 = model.volvol * model.volvol * 2.0 * a * b * (a + b);
  Eigen::Matrix2d drift;
  drift << -a, 1.0, 0.0, -b;
  Eigen::Matrix2d stat;
  const double p22 = s2 / (2.0 * b);
  const double p12 = p22 / (a + b);
  const double p11 = p12 / a;
  stat << p11, p12, p12, p22;
  const Eigen::Matrix2d phi = (drift * delta).exp();
  const Eigen::Matrix2d innov_cov = stat - phi * stat * phi.transpose();
  const Eigen::LDLT<Eigen::Matrix2d> ldlt(innov_cov);
  Eigen::Matrix2d root = ldlt.transpositionsP().transpose() * Eigen::Matrix2d(ldlt.matrixL());
  root *= ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const Eigen::LLT<Eigen::Matrix2d> start(stat);
  Eigen::Vector2d state = start.matrixL() * Eigen::Vector2d(normal(), normal());
  z(0) = state(0);
  for (long i = 1; i < n; ++i) {
    const Eigen::Vector2d e(normal(), normal());
    state = phi * state + root * e;
    z(i) = state(0);
  }
  return z;
}

Eigen::VectorXd sigma_path(const SigmaModel& model, long n, double delta, std::uint64_t seed, std::uint64_t stream) {
  if (model.kind == SigmaKind::constant) return Eigen::VectorXd::Constant(n, model.level);
  NormalStream normal(seed, stream);
  return model.level * log_sigma_path(model, n, delta, normal).array().exp().matrix();
}

}  // namespace

SeriesGrid simulate_sigma(const SigmaModel& model, long n, double delta, std::uint64_t seed, std::uint64_t stream) {
  model.validate();
  check_length(n, 1, "simulate_sigma");
  if (!(delta > 0.0)) throw DomainError("grid step must be positive");
  SeriesGrid out;
  out.values = sigma_path(model, n, delta, seed, stream);
  out.delta = delta;
  out.meta = {"simulated", seed, "sigma:" + to_string(model.kind)};
  return out;
}

BssSimulator::BssSimulator(const KernelSpec& spec, const SigmaModel& model, long n, double delta, BssOptions options)
    : spec_(spec), model_(model), n_(n), delta_(delta), options_(options) {
  spec.validate();
  model.validate();
  check_length(n, 2, "simulate_bss");
  if (!(delta > 0.0)) throw DomainError("grid step must be positive");
  if (options.oversample < 1) throw DomainError("oversample must be an integer >= 1");

  const GammaKernel kernel(spec, 0);
  const double required = kernel.burn_in(1e-6);
  if (options.burn_in > 0.0 && options.burn_in < required) {
    std::ostringstream msg;
    msg << "burn_in " << options.burn_in << " leaves kernel tail mass above 1e-6 c(0); need burn_in >= " << required;
    throw ConfigError(msg.str());
  }
  burn_in_ = options.burn_in > 0.0 ? options.burn_in : required;
  fine_ = delta / options.oversample;
  fine_points_ = (n - 1) * options.oversample + 1;
  cells_ = static_cast<long>(std::ceil(burn_in_ / fine_));

  const double alpha = spec.alpha, lambda = spec.lambda;
  weights_.resize(static_cast<std::size_t>(cells_));
  const double first = quad::integrate_power_singular(
                           [&](double x) { return std::pow(x, 2.0 * alpha) * std::exp(-2.0 * lambda * x); }, fine_,
                           2.0 * alpha, 0.0, 1e-12)
                           .value;
  weights_[0] = std::sqrt(first / fine_);
  for (long l = 1; l < cells_; ++l) {
    // b* = ((l+1)^{a+1} - l^{a+1}) / (a+1))^{1/a}, written to avoid cancellation.
    const double lf = static_cast<double>(l);
    const double mass = std::pow(lf, alpha + 1.0) * std::expm1((alpha + 1.0) * std::log1p(1.0 / lf)) / (alpha + 1.0);
    const double point = std::pow(mass, 1.0 / alpha);
    weights_[static_cast<std::size_t>(l)] = kernel.weight(point * fine_);
  }

  fft_len_ = next_pow2(fine_points_ + cells_ - 1);
  cvec w(static_cast<std::size_t>(fft_len_), 0.0);
  for (long l = 0; l < cells_; ++l) w[static_cast<std::size_t>(l)] = weights_[static_cast<std::size_t>(l)];
  cvec wf;
  fft_engine().fwd(wf, w);
  auto cached = std::make_shared<Eigen::VectorXcd>(fft_len_);
  for (long j = 0; j < fft_len_; ++j) (*cached)(j) = wf[static_cast<std::size_t>(j)];
  weight_fft_ = std::move(cached);
}

double BssSimulator::discretized_tau2(int k, int spacing) const {
  const std::vector<double> filt = difference_weights(k);
  const long step = static_cast<long>(spacing) * options_.oversample;
  auto w = [&](long i) { return (i >= 0 && i < cells_) ? weights_[static_cast<std::size_t>(i)] : 0.0; };
  double sum = 0.0;
  for (long l = 0; l < cells_ + k * step; ++l) {
    double v = 0.0;
    for (int j = 0; j <= k; ++j) v += filt[static_cast<std::size_t>(j)] * w(l - j * step);
    sum += v * v;
  }
  return fine_ * sum;
}

BssPath BssSimulator::sample(std::uint64_t seed, std::uint64_t rep) const {
  const long total = fine_points_ + cells_ - 1;
  // Cell i covers fine times ((i - cells) delta_f, (i - cells + 1) delta_f].
  const Eigen::VectorXd sigma = sigma_path(model_, total, fine_, seed, stream_id(rep, Component::sigma));
  NormalStream normal(seed, stream_id(rep, Component::noise));
  const double root = std::sqrt(fine_);
  cvec xi(static_cast<std::size_t>(fft_len_), 0.0);
  for (long i = 0; i < total; ++i) xi[static_cast<std::size_t>(i)] = sigma(i) * root * normal();
  cvec spec;
  fft_engine().fwd(spec, xi);
  for (long j = 0; j < fft_len_; ++j) spec[static_cast<std::size_t>(j)] *= (*weight_fft_)(j);
  cvec conv;
  fft_engine().inv(conv, spec);

  BssPath out;
  out.series.values.resize(n_);
  for (long i = 0; i < n_; ++i)
    out.series.values(i) = conv[static_cast<std::size_t>(i * options_.oversample + cells_ - 1)].real();
  out.series.delta = delta_;
  out.series.meta = {"simulated", seed, "bss:" + to_string(model_.kind)};
  // Noise cells inside (0, t] carry sigma at fine times 0, ..., t - delta_f.
  out.sigma = sigma.segment(cells_, fine_points_ - 1);
  out.integrated_sigma2 = fine_ * out.sigma.squaredNorm();
  return out;
}

SeriesGrid simulate_bss(const KernelSpec& spec, const SigmaModel& model, long n, double delta, int oversample,
                        double burn_in, std::uint64_t seed) {
  return BssSimulator(spec, model, n, delta, BssOptions{oversample, burn_in}).sample(seed, 0).series;
}

}  // namespace bss
