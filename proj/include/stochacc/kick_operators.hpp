#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stochacc/phase_space.hpp"
#include "stochacc/quadrature.hpp"

namespace stochacc {

/// One sampled perturbation h_t(z), t in [0, tau].
struct PerturbationRealization {
  std::function<double(double, const Vector&)> value;
  std::function<Vector(double, const Vector&)> gradient;
};

/// Random perturbation h_t with zero mean and temporally homogeneous
/// statistics. Realization r is a pure function of (seed, r).
class PerturbationProcess {
 public:
  using Sampler = std::function<PerturbationRealization(std::uint64_t seed, std::uint64_t index)>;

  PerturbationProcess(std::size_t dim, double interval, double amplitude, double correlation_time,
                      std::uint64_t seed, Sampler sampler);

  static PerturbationProcess zero(std::size_t dim, double interval);

  PerturbationRealization realization(std::uint64_t index) const { return sampler_(seed_, index); }

  std::size_t dim() const { return dim_; }
  double interval() const { return interval_; }
  double amplitude() const { return amplitude_; }
  double correlation_time() const { return correlation_time_; }
  std::uint64_t seed() const { return seed_; }

  PerturbationProcess with_seed(std::uint64_t seed) const;
  PerturbationProcess scaled(double c) const;
  /// Realization r of the sum is the sum of realization r of each term.
  friend PerturbationProcess operator+(const PerturbationProcess& a, const PerturbationProcess& b);

 private:
  std::size_t dim_;
  double interval_;
  double amplitude_;
  double correlation_time_;
  std::uint64_t seed_;
  Sampler sampler_;
};

/// Points exp(-lambda X_{H0})(z) with their tangent maps, for a sorted set of
/// lambdas.
struct PullbackSnapshot {
  std::vector<Vector> points;
  std::vector<Matrix> tangents;
};

/// Gauss-Legendre rule in lambda over [0, tau] plus the background flow used
/// for the pullbacks. Shared by every realization evaluated at a point.
class KickQuadrature {
 public:
  /// `flow_max_step` bounds the RK4 step used between consecutive lambdas.
  KickQuadrature(const ScalarField& background, double interval, int nodes, double flow_max_step);

  const QuadratureRule& rule() const { return rule_; }
  double interval() const { return interval_; }
  int nodes() const { return static_cast<int>(rule_.nodes.size()); }
  double flow_max_step() const { return flow_max_step_; }
  const VectorField& background_field() const { return background_; }
  std::size_t dim() const { return background_.dim(); }

  /// Pullback points for ascending `lambdas` (all >= 0).
  PullbackSnapshot pullback(const Vector& z, std::span<const double> lambdas) const;
  PullbackSnapshot pullback(const Vector& z) const { return pullback(z, rule_.nodes); }

 private:
  VectorField background_;
  double interval_;
  double flow_max_step_;
  QuadratureRule rule_;
};

/// A set of s1 realizations sharing one quadrature. Combinations evaluate the
/// background flow once per point for all members.
class KickEnsemble {
 public:
  KickEnsemble(std::shared_ptr<const KickQuadrature> quadrature,
               std::vector<PerturbationRealization> members,
               std::vector<std::uint64_t> realization_indices = {});

  std::size_t size() const { return members_ptr_->size(); }
  std::size_t dim() const { return quadrature_->dim(); }
  const KickQuadrature& quadrature() const { return *quadrature_; }
  const std::vector<std::uint64_t>& realization_indices() const { return indices_; }

  Vector values(const Vector& z) const;
  /// dim x K matrix; column j is grad s1^(j)(z).
  Matrix gradients(const Vector& z) const;

  ScalarField member(std::size_t j) const;
  /// sum_j c_j s1^(j), differentiated through the stored combination.
  ScalarField combination(const Vector& coefficients) const;

 private:
  std::shared_ptr<const KickQuadrature> quadrature_;
  const std::vector<PerturbationRealization>& members() const { return *members_ptr_; }

  std::shared_ptr<const std::vector<PerturbationRealization>> members_ptr_;
  std::vector<std::uint64_t> indices_;
};

/// Realizations first .. first+count-1 of `process` as an s1 ensemble.
KickEnsemble make_kick_ensemble(const PerturbationProcess& process, const ScalarField& background,
                                std::uint64_t first, std::size_t count, int nodes,
                                double flow_max_step);

struct QuadratureInfo {
  std::string rule = "gauss-legendre";
  int nodes = 0;
  double flow_max_step = 0.0;
  int realizations = 0;
};

/// s1 = int_0^tau exp(lambda X_{H0})_* h_{tau-lambda} dlambda for one realization.
ScalarField compute_s1(const PerturbationProcess& process, const ScalarField& background,
                       std::uint64_t realization, int nodes, double flow_max_step);

/// Monte Carlo estimate of E[s2] over realizations 0..R-1 of the nested
/// bracket integral, with per-point standard errors.
class S2MeanEstimate {
 public:
  struct Value {
    double mean;
    double standard_error;
  };
  struct Gradient {
    Vector mean;
    Vector standard_error;
  };

  S2MeanEstimate(const PerturbationProcess& process, const ScalarField& background,
                 int realizations, int nodes, double flow_max_step);

  /// s2 for every realization at z.
  Vector samples(const Vector& z) const;
  Value evaluate(const Vector& z) const;
  /// Central differences of each realization's s2 (fixed stencil, fd::step).
  Gradient gradient(const Vector& z) const;
  /// Mean field; its gradient is the finite-difference gradient above.
  ScalarField field() const;

  const QuadratureInfo& info() const { return info_; }

 private:
  std::shared_ptr<const KickQuadrature> quadrature_;
  std::vector<PerturbationRealization> members_;
  std::vector<double> lambdas_;        // sorted distinct lambdas
  std::vector<std::size_t> outer_idx_;  // index of a_i in lambdas_
  std::vector<std::size_t> inner_idx_;  // index of a_i*u_j, row-major (i, j)
  std::vector<double> pair_weight_;    // W_i * a_i * w_j
  QuadratureInfo info_;
};

struct KickResult {
  std::vector<ScalarField> s1;
  ScalarField s2_mean;
  QuadratureInfo info;
};

KickResult compute_kicks(const PerturbationProcess& process, const ScalarField& background,
                         int realizations, int nodes, double flow_max_step);

}  // namespace stochacc
