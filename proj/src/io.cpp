#include "bss/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "bss/errors.hpp"
#include "bss/stats.hpp"

namespace bss {

using nlohmann::json;

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }


std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(SeriesFormat format) { return format == SeriesFormat::csv ? "csv" : "raw"; }

SeriesFormat parse_series_format(const std::string& name) {
  if (name == "csv") return SeriesFormat::csv;
  if (name == "raw" || name == "f64") return SeriesFormat::raw_f64;
  throw ConfigError("unknown series format '" + name + "' (expected csv or raw)");
}

double delta_from_rate(double rate_hz) {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw ConfigError("sampling rate must be positive");
  return 1.0 / rate_hz;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

SeriesGrid ingest_series(const std::string& path, SeriesFormat format, double delta, bool standardize) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("grid step must be positive");
  std::vector<double> v;
  if (format == SeriesFormat::csv) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      std::string cell = trim(line);
      const auto comma = cell.find(',');
      if (comma != std::string::npos) cell = trim(cell.substr(0, comma));
      if (cell.empty()) continue;
      double x = 0.0;
      const char* b = cell.data();
      const char* e = cell.data() + cell.size();
      if (*b == '+') ++b;
      const auto res = std::from_chars(b, e, x);
      if (res.ec != std::errc() || res.ptr != e) {
        const bool header = first && std::none_of(cell.begin(), cell.end(), [](char c) { return std::isdigit(c); });
        if (header) {
          first = false;
          continue;
        }
        std::ostringstream msg;
        msg << "'" << path << "': entry " << v.size() << " ('" << cell << "') is not a number";
        throw DataError(msg.str());
      }
      first = false;
      v.push_back(x);
    }
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0) throw DataError("'" + path + "': size is not a multiple of 8 bytes");
    v.resize(bytes.size() / 8);
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, bytes.data() + 8 * i, 8);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      v[i] = std::bit_cast<double>(bits);
    }
  }
  if (v.empty()) throw DataError("'" + path + "' contains no observations");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      std::ostringstream msg;
      msg << "'" << path << "': non-finite value at index " << i;
      throw DataError(msg.str());
    }
  }
  SeriesGrid s;
  s.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  s.delta = delta;
  s.meta = {"ingested", 0, path};
  if (standardize) {
    const double m = mean(v);
    const double sd = std::sqrt(sample_variance(v));
    if (!(sd > 0.0)) throw DegenerateInputError("cannot standardize a constant series");
    s.values = (s.values.array() - m) / sd;
  }
  return s;
}

void export_series(const SeriesGrid& series, const std::string& path, SeriesFormat format) {
  if (format == SeriesFormat::csv) {
    auto out = open_out(path);
    for (Eigen::Index i = 0; i < series.size(); ++i) out << format_double(series.values(i)) << '\n';
    if (!out) throw IoError("write to '" + path + "' failed");
    return;
  }
  auto out = open_out(path, std::ios::out | std::ios::binary);
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(series.values(i));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char b[8];
    std::memcpy(b, &bits, 8);
    out.write(b, 8);
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

json Report::to_json() const {
  return json{{"schema_version", schema_version}, {"command", command}, {"config", config},
              {"results", results},               {"timing", timing},   {"warnings", warnings}};
}

Report Report::from_json(const json& j) {
  Report r;
  r.schema_version = j.at("schema_version").get<std::string>();
  r.command = j.at("command").get<std::string>();
  r.config = j.value("config", json::object());
  r.results = j.value("results", json::object());
  r.timing = j.value("timing", json::object());
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

json Report::payload() const {
  json j = to_json();
  j.erase("timing");
  return j;
}

void emit_report(const Report& report, const std::string& path) {
  auto out = open_out(path);
  out << report.to_json().dump(2) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

Report read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Report::from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw DataError("'" + path + "' is not a valid report: " + e.what());
  }
}

void emit_csv(const CsvTable& table, const std::string& path) {
  auto out = open_out(path);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  if (!out) throw IoError("write to '" + path + "' failed");
}

CsvTable scan_csv(const ScanTable& table) {
  CsvTable t;
  t.header = {"p", "lag_multiplier", "alpha_hat", "count"};
  for (const auto& r : table.rows)
    t.rows.push_back({format_double(r.p), std::to_string(r.lag_multiplier), format_double(r.alpha_hat),
                      std::to_string(r.count)});
  return t;
}

CsvTable psd_csv(const PsdEstimate& psd) {
  CsvTable t;
  t.header = {"freq", "density"};
  for (Eigen::Index i = 0; i < psd.freqs.size(); ++i)
    t.rows.push_back({format_double(psd.freqs(i)), format_double(psd.density(i))});
  return t;
}

void emit_svg(const std::vector<SvgSeries>& lines, const std::string& path, const std::string& title,
              const std::string& x_label, const std::string& y_label, bool log_x, bool log_y) {
  constexpr double W = 720, H = 480, L = 80, R = 160, T = 40, B = 60;
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : lines)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      x0 = std::min(x0, a), x1 = std::max(x1, a), y0 = std::min(y0, b), y1 = std::max(y1, b);
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  auto px = [&](double a) { return L + (a - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double b) { return H - B - (b - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double a = x0 + (x1 - x0) * i / 4, b = y0 + (y1 - y0) * i / 4;
    out << "<text x=\"" << px(a) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << format_double(std::round((log_x ? std::pow(10.0, a) : a) * 1e4) / 1e4) << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << py(b) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << format_double(std::round((log_y ? std::pow(10.0, b) : b) * 1e4) / 1e4) << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
      << (T + H - B) / 2 << ")\">" << y_label << "</text>\n";
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& s = lines[k];
    const char* c = colors[k % 6];
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (std::isfinite(a) && std::isfinite(b)) out << px(a) << ',' << py(b) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" font-size=\"12\" fill=\"" << c << "\">"
        << s.label << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write to '" + path + "' failed");
}

json to_json(const KernelSpec& spec) {
  return json{{"alpha", spec.alpha}, {"lambda", spec.lambda}, {"quad_tol", spec.quad_tol}};
}

json to_json(const SigmaModel& m) {
  return json{{"kind", to_string(m.kind)},          {"level", m.level},        {"volvol", m.volvol},
              {"mean_reversion", m.mean_reversion}, {"smoothing", m.smoothing}};
}

json to_json(const LambdaMatrix& l) {
  return json{{"lambda11", num(l.lambda11())},
              {"lambda12", num(l.lambda12())},
              {"lambda22", num(l.lambda22())},
              {"contrast", num(l.contrast())},
              {"p", l.power},
              {"hurst", l.hurst},
              {"k", l.order},
              {"hermite_truncation", l.truncation},
              {"max_lag", l.max_lag},
              {"lag_tail", num(l.lag_tail)},
              {"hermite_tail", num(l.hermite_tail)}};
}

json to_json(const EstimateReport& r) {
  const auto& d = r.diagnostics;
  json diag{{"count_v1", d.count_v1},
            {"count_v2", d.count_v2},
            {"v_p", num(d.v_p)},
            {"v_2p", num(d.v_2p)},
            {"regime_range", {d.regime_low, d.regime_high}}};
  if (d.lambda) {
    diag["lambda"] = to_json(*d.lambda);
    diag["hurst_plugin"] = d.hurst_plugin;
    diag["hurst_clamped"] = d.hurst_clamped;
  }
  if (r.method == "gapped") {
    diag["variance_factor"] = num(d.variance_factor);
    diag["std_error_unscaled"] = num(d.std_error_unscaled);
  }
  json j{{"method", r.method},
         {"p", r.p},
         {"delta", r.delta},
         {"horizon", r.horizon},
         {"cof", num(r.cof)},
         {"alpha_hat", num(r.alpha_hat)},
         {"regime_ok", r.regime_ok},
         {"diagnostics", diag},
         {"warnings", r.warnings}};
  j["gap"] = r.gap ? json(*r.gap) : json(nullptr);
  if (r.method != "point") {
    j["std_error"] = num(r.std_error);
    j["level"] = r.level;
    j["ci"] = {num(r.ci_low), num(r.ci_high)};
  }
  return j;
}

json to_json(const ScanTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"p", r.p},
                    {"lag_multiplier", r.lag_multiplier},
                    {"alpha_hat", num(r.alpha_hat)},
                    {"count", r.count},
                    {"sufficient", r.sufficient}});
  return json{{"rows", rows}, {"delta", t.delta}, {"reference_alpha", t.reference_alpha}, {"thinning", t.thinning}};
}

json to_json(const SpectrumFit& f) {
  return json{{"alpha", num(f.alpha)},       {"lambda", num(f.lambda)}, {"log_const", num(f.log_const)},
              {"f_min", f.f_min},            {"f_max", f.f_max},        {"residual", num(f.residual)},
              {"bins", f.bins},              {"iterations", f.iterations},
              {"alpha_in_range", f.alpha_in_range}, {"high_frequency_slope", num(-2.0 * (1.0 + f.alpha))}};
}

json to_json(const McConfig& c) {
  return json{{"experiment", c.experiment}, {"kernel", to_json(c.kernel)}, {"sigma", to_json(c.sigma)},
              {"n", c.n},                   {"delta", c.delta},            {"reps", c.reps},
              {"seed", c.seed},             {"p", c.p},                    {"k", c.k},
              {"level", c.level},           {"kappa", c.kappa},            {"oversample", c.oversample},
              {"exact_core", c.exact_core}, {"hurst", c.hurst}};
}

json to_json(const McSummary& s) {
  json j{{"reps", s.reps},
         {"failures", s.failures},
         {"failure_messages", s.failure_messages},
         {"truth", num(s.truth)},
         {"mean", num(s.mean)},
         {"bias", num(s.bias)},
         {"rmse", num(s.rmse)},
         {"variance", num(s.variance)},
         {"regime_flags", s.regime_flags}};
  const std::string& x = s.config.experiment;
  if (x == "estimate" || x == "gap") {
    j["coverage"] = num(s.coverage);
    j["ks_distance"] = num(s.ks);
    j["mean_std_error"] = num(s.mean_std_error);
  }
  if (x == "gap") {
    j["plain_mean"] = num(s.plain_mean);
    j["plain_coverage"] = num(s.plain_coverage);
    j["plain_ks_distance"] = num(s.plain_ks);
  }
  return j;
}

}  // namespace bss
