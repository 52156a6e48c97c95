#include "stochacc/wiener.hpp"

#include <cmath>
#include <numbers>

namespace stochacc {
namespace rng {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash(std::uint64_t seed, Stream stream, std::uint64_t a, std::uint64_t b,
                   std::uint64_t c) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ static_cast<std::uint64_t>(stream));
  h = mix(h ^ a);
  h = mix(h ^ b);
  return mix(h ^ c);
}

double to_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::uniform() { return to_unit(mix(base_ ^ mix(counter_++))); }

double CounterRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::Vector3d CounterRng::unit_vector3() {
  const double z = 2.0 * uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace rng

double WienerDriver::standard_normal(std::uint64_t path, std::uint64_t step,
                                     std::uint64_t channel) const {
  const std::uint64_t key = rng::hash(seed_, rng::Stream::wiener, path, step, channel);
  const double u1 = rng::to_unit(key);
  const double u2 = rng::to_unit(rng::mix(key ^ 0x2545f4914f6cdd1dULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double WienerDriver::increment(std::uint64_t path, std::uint64_t step, std::uint64_t channel,
                               double h) const {
  return std::sqrt(h) * standard_normal(path, step, channel);
}

Vector WienerDriver::increments(std::uint64_t path, std::uint64_t step, double h) const {
  Vector dw(static_cast<Eigen::Index>(channels_));
  const double s = std::sqrt(h);
  for (std::size_t k = 0; k < channels_; ++k) {
    dw[static_cast<Eigen::Index>(k)] = s * standard_normal(path, step, k);
  }
  return dw;
}

}  // namespace stochacc
