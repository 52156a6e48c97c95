#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "stochacc/kick_operators.hpp"
#include "stochacc/phase_space.hpp"
#include "stochacc/sde.hpp"

namespace stochacc {

/// H = |p|^2 / 2 in 2*dof dimensions.
ScalarField free_particle_hamiltonian(std::size_t dof);

// --- Example 1: random electrostatic pulses --------------------------------

enum class PulseWindow { uniform, bump };

/// Potential phi_k(x, t) = (z_k . x) phi0 u(t - k tau) with z_k uniform on the
/// unit sphere. Coordinates (x, v), mass-normalized.
struct PulsePlasmaConfig {
  double strength = 1.0;  // (q/m) phi0, full perturbation strength
  double tau = 1.0;
  PulseWindow window = PulseWindow::uniform;
  /// Normalize the window to unit area; otherwise uniform u = 1 and
  /// bump u = sin^2(pi s / tau).
  bool unit_area = true;

  void validate() const;
  double window_value(double s) const;
  /// strength * int_0^tau u, by 64-point Gauss-Legendre.
  double m0() const;
  /// strength * int_0^tau (tau - s) u, by 64-point Gauss-Legendre.
  double m1() const;
};

/// Direction of pulse `pulse` for ensemble member `sample`.
Eigen::Vector3d pulse_direction(std::uint64_t seed, std::uint64_t sample, std::uint64_t pulse);

/// h_t(x, v) = strength u(t) z . x, realization r using pulse_direction(seed, r, 0).
PerturbationProcess example1_perturbation(const PulsePlasmaConfig& cfg, std::uint64_t seed);

/// States at the pulse boundaries 0, tau, ..., N tau (N + 1 entries), by
/// exact piecewise integration: v += -m0 z, x += v tau - m1 z per interval.
std::vector<Vector> example1_micro_run(const PulsePlasmaConfig& cfg, const Vector& z0,
                                       int pulse_count, std::uint64_t seed,
                                       std::uint64_t sample = 0);

/// H_i = e_i . (m1 v - m0 x) / sqrt(3), i = 1..3.
std::vector<ScalarField> example1_basis_hamiltonians(const PulsePlasmaConfig& cfg);

/// dx = v dt + m1/sqrt(3 tau) o dW, dv = m0/sqrt(3 tau) o dW.
LangevinModel example1_model(const PulsePlasmaConfig& cfg);

/// Exact two-point covariance of X_{s1}: (1/3) [[m1^2 I, m0 m1 I], [m0 m1 I, m0^2 I]].
Matrix example1_alpha(const PulsePlasmaConfig& cfg, const Vector& z1, const Vector& z2);

// --- Counterexample: state-dependent channel rotation ------------------------

struct CounterexampleConfig {
  enum class Phase { constant, linear, custom };

  PulsePlasmaConfig pulse;
  Phase phase = Phase::constant;
  double constant = 0.0;
  /// phi(z) = linear . z (6 entries over (x, v)).
  Vector linear = Vector::Zero(6);
  std::function<double(const Vector&)> custom_value;
  std::function<Vector(const Vector&)> custom_gradient;

  void validate() const;
  double phi(const Vector& z) const;
  Vector phi_gradient(const Vector& z) const;
};

/// phi(z) = x . e1.
CounterexampleConfig counterexample_x1(const PulsePlasmaConfig& pulse);

/// Six raw channels cos(phi) c_i and -sin(phi) c_i, c_i = (m1 e_i, m0 e_i)/sqrt(3 tau).
LangevinModel counterexample_model(const CounterexampleConfig& cfg);

// --- Example 2: ions in a lower-hybrid wave ----------------------------------

double sinc(double x);

/// H_t = I - eps sin(sqrt(2I) sin(theta) - nu t - eta), nu = n0 + delta,
/// coordinates (theta, I), period tau = 2 pi.
struct KarneyConfig {
  static constexpr double tau = 2.0 * std::numbers::pi;

  double epsilon = 0.1;
  int n0 = 5;
  double delta = 0.2;
  /// Series over m in [-M, M], M = max(n0, ceil(sqrt(2I))) + series_margin.
  int series_margin = 40;
  double i_min = 1e-3;
  double i_lo = 1.0;
  double i_hi = 10.0;

  double nu() const { return n0 + delta; }
  void validate() const;
  void check_action(double i) const;
};

/// H0 = I on (theta, I).
ScalarField action_hamiltonian();

/// Phase of the single-harmonic kick: s1 = 2 pi sinc(pi delta) J_n0 sin(n0 theta + phase).
double karney_kick_phase(double delta, double eta);

/// Wave phase eta of realization r (uniform on [0, 2 pi)).
double karney_wave_phase(std::uint64_t seed, std::uint64_t r);

/// h = -sin(sqrt(2I) sin(theta) - nu t - eta) or, with single_harmonic, its
/// resonant term -J_n0(sqrt(2I)) sin(n0 theta - nu t - eta).
PerturbationProcess karney_perturbation(const KarneyConfig& cfg, std::uint64_t seed,
                                        bool single_harmonic);

struct KarneySeries {
  double value = 0.0;
  double d_action = 0.0;   // d/dI
  double d2_action = 0.0;  // d^2/dI^2
  int terms = 0;           // M
  double tail_bound = 0.0;
};

/// Phase-averaged E[s2](I) = (pi/4) sum_m (J_{m+1}^2 - J_{m-1}^2)/(m - nu)
///                         + (sin(2 pi delta)/8) sum_m (J_{m+1}^2 - J_{m-1}^2)/(nu - m)^2.
KarneySeries karney_s2_series(const KarneyConfig& cfg, double action);
ScalarField karney_s2_field(const KarneyConfig& cfg);

/// sqrt(2) pi sinc(pi delta) J_n0(sqrt(2I)) {cos, sin}(n0 theta).
std::vector<ScalarField> example2_basis_hamiltonians(const KarneyConfig& cfg);

/// H~0 = I + (eps^2/2pi) E[s2](I), H~k = (eps/sqrt(2pi)) H_k.
LangevinModel example2_model(const KarneyConfig& cfg);

/// Nominal amplitude above which ion motion is chaotic, nu^(1/3)/4. Quoted
/// from the lower-hybrid heating literature, not computed here; micro runs
/// require epsilon at or above it.
double karney_chaos_threshold(const KarneyConfig& cfg);

/// D_II = (eps^2 pi/2) sinc^2(pi delta) n0^2 J_n0^2(sqrt(2I)).
double example2_diffusion_ii(const KarneyConfig& cfg, double action);

/// States at period boundaries (period_count + 1 entries). Each period draws
/// eta from the wave_phase stream and integrates the full Hamiltonian with RK4.
std::vector<Vector> example2_micro_run(const KarneyConfig& cfg, const Vector& z0, int period_count,
                                       std::uint64_t seed, std::uint64_t sample,
                                       int steps_per_period);

// --- Test model with state-dependent noise ----------------------------------

/// H~0 = lambda q p, H~1 = sigma q p. Pathwise solution
/// q = q0 exp(lambda t + sigma W), p = p0 exp(-lambda t - sigma W).
LangevinModel hyperbolic_test_model(double lambda, double sigma);

}  // namespace stochacc
