#pragma once

#include <cstdint>

#include "stochacc/phase_space.hpp"

namespace stochacc {

/// Counter-based random numbers: every draw is a pure function of its key, so
/// results never depend on draw order or on how work is split across threads.
namespace rng {

/// Stream tags keep unrelated uses of one master seed apart.
enum class Stream : std::uint64_t {
  wiener = 0x57,
  perturbation = 0x50,
  pulse_direction = 0x44,
  wave_phase = 0x48,
  initial_state = 0x49,
  probe = 0x4f,
};

/// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t x);
std::uint64_t hash(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint64_t b = 0,
                   std::uint64_t c = 0);
/// Uniform on the open interval (0, 1) with 53 random bits.
double to_unit(std::uint64_t bits);

/// Sequential view over one key; draw n uses counter n.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint64_t b = 0)
      : base_(hash(seed, stream, a, b)) {}

  double uniform();
  double normal();
  /// Uniform direction on the unit sphere in R^3.
  Eigen::Vector3d unit_vector3();

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace rng

/// Replayable multi-channel Brownian increments keyed by
/// (seed, path id, step index, channel).
class WienerDriver {
 public:
  WienerDriver(std::uint64_t seed, std::size_t channels) : seed_(seed), channels_(channels) {}

  /// Standard normal draw for one key.
  double standard_normal(std::uint64_t path, std::uint64_t step, std::uint64_t channel) const;
  /// Increment with variance h.
  double increment(std::uint64_t path, std::uint64_t step, std::uint64_t channel, double h) const;
  /// All channels of one step.
  Vector increments(std::uint64_t path, std::uint64_t step, double h) const;

  std::uint64_t seed() const { return seed_; }
  std::size_t channels() const { return channels_; }

 private:
  std::uint64_t seed_;
  std::size_t channels_;
};

}  // namespace stochacc
