#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace bss {

struct SeriesMeta {
  /// "simulated" or "ingested".
  std::string kind = "simulated";
  std::uint64_t seed = 0;
  /// Generating model or source path.
  std::string model;
};

/// Equispaced observations X_0, X_delta, ..., X_{N delta}.
struct SeriesGrid {
  Eigen::VectorXd values;
  double delta = 1.0;
  double origin = 0.0;
  SeriesMeta meta;

  Eigen::Index size() const noexcept { return values.size(); }
  /// Index of the last observation, N.
  Eigen::Index last_index() const noexcept { return values.size() - 1; }
  /// Observation horizon t = N delta.
  double horizon() const noexcept { return delta * static_cast<double>(values.size() - 1); }

  /// DomainError unless delta > 0, the series is nonempty and every value is finite.
  void validate() const;
};

}  // namespace bss
