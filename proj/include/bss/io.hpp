#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "bss/estimate.hpp"
#include "bss/montecarlo.hpp"
#include "bss/series.hpp"
#include "bss/spectral.hpp"

namespace bss {

enum class SeriesFormat { csv, raw_f64 };

std::string to_string(SeriesFormat format);
/// "csv" or "raw" (also "f64"); ConfigError otherwise.
SeriesFormat parse_series_format(const std::string& name);

/// Reads a single-column CSV (optional non-numeric header line, blank lines
/// skipped) or raw little-endian float64. DataError on empty input or a
/// non-finite value (naming the first offending index), IoError if the file
/// cannot be read.
SeriesGrid ingest_series(const std::string& path, SeriesFormat format, double delta, bool standardize = false);

/// Grid step from a sampling rate in Hz.
double delta_from_rate(double rate_hz);

/// Writes values in the given format; CSV uses the shortest round-trip form so the
/// round trip is exact.
void export_series(const SeriesGrid& series, const std::string& path, SeriesFormat format);

/// JSON report shared by all subcommands.
struct Report {
  std::string schema_version = "1";
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json results = nlohmann::json::object();
  nlohmann::json timing = nlohmann::json::object();
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
  static Report from_json(const nlohmann::json& j);
  /// Same report with timing removed, as used by reproducibility checks.
  nlohmann::json payload() const;
  friend bool operator==(const Report& a, const Report& b) { return a.to_json() == b.to_json(); }
};

/// Pretty-printed JSON with sorted keys and a trailing newline.
void emit_report(const Report& report, const std::string& path);
Report read_report(const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void emit_csv(const CsvTable& table, const std::string& path);

CsvTable scan_csv(const ScanTable& table);
CsvTable psd_csv(const PsdEstimate& psd);

/// Minimal SVG line chart; axes optionally logarithmic.
struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};
void emit_svg(const std::vector<SvgSeries>& lines, const std::string& path, const std::string& title,
              const std::string& x_label, const std::string& y_label, bool log_x, bool log_y);

/// Shortest decimal form that parses back to the same double; "nan"/"inf"
/// spelled out.
std::string format_double(double x);

nlohmann::json to_json(const KernelSpec& spec);
nlohmann::json to_json(const SigmaModel& model);
nlohmann::json to_json(const LambdaMatrix& lambda);
nlohmann::json to_json(const EstimateReport& report);
nlohmann::json to_json(const ScanTable& table);
nlohmann::json to_json(const SpectrumFit& fit);
nlohmann::json to_json(const McConfig& config);
nlohmann::json to_json(const McSummary& summary);

}  // namespace bss
