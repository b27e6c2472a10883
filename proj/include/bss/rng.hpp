#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace bss {

/// Counter-based Philox4x32-10 generator (Salmon et al., SC'11).
///
/// A generator is fully determined by a 64-bit key (the seed) and a 64-bit
/// stream id; the remaining 64 counter bits index blocks inside the stream.
/// Distinct (seed, stream) pairs never share state, which is what lets Monte
/// Carlo replications run on any number of workers and still be reproducible.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Uniform double in the open interval (0, 1).
  double uniform() noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
};

/// Standard normal variates via the Box-Muller transform on a Philox stream.
/// Implemented here rather than with std::normal_distribution so that the
/// sequence is identical across standard library implementations.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept : gen_(seed, stream) {}

  double operator()() noexcept;
  void fill(std::span<double> out) noexcept;
  double uniform() noexcept { return gen_.uniform(); }

 private:
  Philox4x32 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stream ids for the components of one simulated replication.
enum class Component : std::uint64_t { noise = 0, sigma = 1, aux = 2 };

/// Stream id for `component` of replication `rep`. Single-path simulators use rep 0.
constexpr std::uint64_t stream_id(std::uint64_t rep, Component component) noexcept {
  return rep * 8 + static_cast<std::uint64_t>(component);
}

}  // namespace bss
