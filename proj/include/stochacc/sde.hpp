#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stochacc/phase_space.hpp"
#include "stochacc/wiener.hpp"

namespace stochacc {

/// Stratonovich SDE dz = a(z) dt + sum_k b_k(z) o dW^k. When built from
/// Hamiltonians, a = X_{H~0} and b_k = X_{H~k}.
class LangevinModel {
 public:
  LangevinModel(VectorField drift, std::vector<VectorField> noise, std::string name = {});

  static LangevinModel hamiltonian(const ScalarField& drift_hamiltonian,
                                   const std::vector<ScalarField>& noise_hamiltonians,
                                   std::string name = {});
  /// H~0 = H0 + (eps^2/tau) E[s2], H~k = (eps/sqrt(tau)) H_k.
  static LangevinModel from_kicks(const ScalarField& background, const ScalarField& s2_mean,
                                  const std::vector<ScalarField>& modes, double epsilon,
                                  double interval, std::string name = {});

  std::size_t dim() const { return drift_.dim(); }
  std::size_t channels() const { return noise_.size(); }
  const std::string& name() const { return name_; }

  const VectorField& drift() const { return drift_; }
  const VectorField& noise(std::size_t k) const { return noise_.at(k); }
  const std::vector<VectorField>& noise_fields() const { return noise_; }

  bool is_hamiltonian() const;
  /// Generators; nullopt for raw fields.
  const std::optional<ScalarField>& drift_hamiltonian() const { return drift_.generator(); }
  const std::optional<ScalarField>& noise_hamiltonian(std::size_t k) const {
    return noise_.at(k).generator();
  }

  Vector drift_at(const Vector& z) const { return drift_(z); }
  /// dim x channels; column k is b_k(z).
  Matrix noise_at(const Vector& z) const;

 private:
  VectorField drift_;
  std::vector<VectorField> noise_;
  std::string name_;
};

/// A step produced a non-finite state (or a field refused the state).
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, Vector z, double h, Vector dw, std::int64_t step = -1)
      : std::runtime_error(what), z_(std::move(z)), h_(h), dw_(std::move(dw)), step_(step) {}
  const Vector& state() const { return z_; }
  double h() const { return h_; }
  const Vector& increments() const { return dw_; }
  std::int64_t step() const { return step_; }

 private:
  Vector z_;
  double h_;
  Vector dw_;
  std::int64_t step_;
};

/// Stratonovich predictor-corrector (Heun).
Vector euler_heun_step(const LangevinModel& model, const Vector& z, double h, const Vector& dw);

/// Implicit midpoint z' = z + h a(m) + sum_k b_k(m) dW_k, m = (z + z')/2, by
/// fixed-point iteration until the update is below tol * max(1, |z|_inf).
/// Throws StepFailure after max_iter iterations without convergence.
Vector midpoint_step(const LangevinModel& model, const Vector& z, double h, const Vector& dw,
                     double tol, int max_iter, int* iterations = nullptr);

/// Ito-style explicit step; converges to the Ito interpretation of the fields.
Vector euler_maruyama_step(const LangevinModel& model, const Vector& z, double h, const Vector& dw);

enum class Scheme { euler_heun, midpoint, euler_maruyama };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct PathState {
  Vector z;
  double t = 0.0;
  std::int64_t step = 0;
  /// H~0(z) for Hamiltonian drifts, NaN otherwise.
  double drift_energy = std::numeric_limits<double>::quiet_NaN();
};

struct IntegrateOptions {
  Scheme scheme = Scheme::euler_heun;
  /// Keep every n-th state (the initial and final states are always kept).
  std::int64_t record_every = 1;
  double tol = 1e-12;
  int max_iter = 50;
  bool record_energy = true;
};

/// Step count N with N*h = T; rejects T that is not an integer multiple of h.
std::int64_t step_count(double T, double h);

/// N steps of the chosen scheme, increments keyed by (path_id, step, channel).
std::vector<PathState> integrate(const LangevinModel& model, const Vector& z0, double T, double h,
                                 const WienerDriver& driver, std::uint64_t path_id,
                                 const IntegrateOptions& options = {});

/// Two particles driven by the same increments (keyed by pair_id).
std::pair<std::vector<PathState>, std::vector<PathState>> integrate_pair(
    const LangevinModel& model, const Vector& za0, const Vector& zb0, double T, double h,
    const WienerDriver& driver, std::uint64_t pair_id, const IntegrateOptions& options = {});

}  // namespace stochacc
