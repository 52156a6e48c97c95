#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochacc/models.hpp"
#include "stochacc/sde.hpp"

namespace stochacc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Problem { example1, example2, counterexample, custom };
enum class Pipeline { analytic, synthesized };

std::string to_string(Problem p);
std::string to_string(Pipeline p);

struct EnsembleSettings {
  std::size_t paths = 1000;
  double T = 10.0;
  double h = 0.1;
  /// When positive these override T and h: T = intervals * tau,
  /// h = tau / steps_per_interval (tau = 2 pi for example2).
  int intervals = 0;
  int steps_per_interval = 0;
  Scheme scheme = Scheme::euler_heun;
  std::int64_t record_every = 10;
  /// Number of paths written to paths.csv.
  std::size_t csv_paths = 20;
  double tol = 1e-12;
  int max_iter = 50;
};

struct BasisSettings {
  std::size_t samples = 2000;
  std::size_t holdout = 2000;
  std::optional<std::size_t> rank;
  double energy = 0.999;
  double rank_tolerance = 1e-10;
  int nodes = 16;
  double flow_max_step = 0.25;
  /// Probe box; empty means the problem default.
  std::vector<double> lo, hi;
  std::vector<int> per_axis;
  std::size_t test_pairs = 50;
  /// Held-out residual bound; unset means 0.05 (example2: 0.1).
  std::optional<double> residual_tolerance;
};

struct MicroSettings {
  std::size_t samples = 0;
  /// Pulses (example1) or wave periods (example2).
  int count = 100;
  int steps_per_period = 200;
};

struct ShortTimeSettings {
  double h = 1e-4;
  std::size_t samples = 100000;
  std::vector<double> actions = {2.0, 4.0, 6.0};
};

struct PairSettings {
  std::size_t count = 1000;
  std::vector<double> separation = {1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
};

struct WeakOrderSettings {
  double lambda = 0.5;
  double sigma = 1.0;
  double T = 1.0;
  std::size_t paths = 20000;
  std::vector<double> steps = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> initial_state = {1.0, 1.0};
};

struct PlaneWave {
  double amplitude = 1.0;
  std::vector<double> k;
  double omega = 0.0;
};

/// h_t(q, p) = sum_j a_j cos(k_j . q - omega_j t - eta_j), eta_j uniform per
/// realization, over the free-particle background |p|^2 / 2.
struct CustomPerturbationConfig {
  std::size_t dof = 1;
  double tau = 1.0;
  double epsilon = 0.1;
  std::vector<PlaneWave> waves = {{1.0, {1.0}, 0.5}};
  /// Realizations for the E[s2] drift term; 0 drops the term.
  int s2_realizations = 16;
  void validate() const;
};

struct ExperimentConfig {
  Problem problem = Problem::example1;
  Pipeline pipeline = Pipeline::analytic;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out;

  PulsePlasmaConfig example1;
  KarneyConfig example2;
  double initial_action = 4.0;
  /// Keep only the resonant harmonic of the wave when sampling s1.
  bool single_harmonic = true;
  CounterexampleConfig counterexample = counterexample_x1({});  // pulse comes from example1
  CustomPerturbationConfig custom;
  std::vector<double> initial_state;  // empty means the problem default

  EnsembleSettings ensemble;
  BasisSettings basis;
  MicroSettings micro;
  ShortTimeSettings short_time;
  PairSettings pairs;
  WeakOrderSettings weak_order;
  double sigma_band = 3.0;

  void validate() const;
  std::size_t dim() const;
  /// tau of the problem (2 pi for example2).
  double interval() const;
  double horizon() const;
  double step() const;
  /// Initial state with problem defaults applied (theta is per-path for example2).
  Vector initial() const;
};

ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);
/// Canonical YAML of every field; parse_config(to_yaml(c)) reproduces c.
std::string to_yaml(const ExperimentConfig& c);

}  // namespace stochacc
