#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace stochacc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a deterministic or stochastic integration meets a non-finite state.
class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Point of a 2n-dimensional canonical phase space. The first n coordinates
/// are position-like, the last n momentum-like.
class PhasePoint {
 public:
  PhasePoint() = default;
  explicit PhasePoint(Vector coords);
  PhasePoint(std::initializer_list<double> coords);

  std::size_t dim() const { return static_cast<std::size_t>(coords_.size()); }
  std::size_t degrees_of_freedom() const { return dim() / 2; }
  double operator[](std::size_t i) const { return coords_[static_cast<Eigen::Index>(i)]; }
  const Vector& coords() const { return coords_; }
  operator const Vector&() const { return coords_; }  // NOLINT(google-explicit-constructor)

  Eigen::VectorBlock<const Vector> position() const { return coords_.head(coords_.size() / 2); }
  Eigen::VectorBlock<const Vector> momentum() const { return coords_.tail(coords_.size() / 2); }

 private:
  Vector coords_;
};

enum class Provenance { analytic, sample_combination, interpolated };

std::string to_string(Provenance p);

/// Scalar function on phase space with value, gradient and an optional
/// analytic Hessian. Immutable; copies share the underlying closures.
class ScalarField {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  ScalarField(std::size_t dim, ValueFn value, GradientFn gradient,
              Provenance provenance = Provenance::analytic, HessianFn hessian = {});

  static ScalarField zero(std::size_t dim);
  static ScalarField constant(std::size_t dim, double c);

  double value(const Vector& z) const;
  Vector gradient(const Vector& z) const;
  /// Analytic when available, otherwise central differences of the gradient
  /// (symmetrized).
  Matrix hessian(const Vector& z) const;

  double operator()(const Vector& z) const { return value(z); }

  std::size_t dim() const { return dim_; }
  Provenance provenance() const { return provenance_; }
  bool has_analytic_hessian() const { return static_cast<bool>(hessian_); }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double c, const ScalarField& f);

 private:
  std::size_t dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  Provenance provenance_;
};

/// Vector field on phase space. Hamiltonian fields keep their generator.
class VectorField {
 public:
  using EvalFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;

  static VectorField hamiltonian(const ScalarField& generator);
  static VectorField raw(std::size_t dim, EvalFn eval, JacobianFn jacobian = {});

  Vector operator()(const Vector& z) const { return eval_(z); }
  /// Analytic when available, otherwise central differences of eval.
  Matrix jacobian(const Vector& z) const;

  std::size_t dim() const { return dim_; }
  bool is_hamiltonian() const { return generator_.has_value(); }
  const std::optional<ScalarField>& generator() const { return generator_; }

 private:
  VectorField(std::size_t dim, EvalFn eval, JacobianFn jacobian,
              std::optional<ScalarField> generator);

  std::size_t dim_;
  EvalFn eval_;
  JacobianFn jacobian_;
  std::optional<ScalarField> generator_;
};

namespace fd {
/// Central-difference step for coordinate value x: 1e-5 relative, floor 1e-5.
double step(double x);
Vector gradient(const std::function<double(const Vector&)>& f, const Vector& z);
Matrix jacobian(const std::function<Vector(const Vector&)>& f, const Vector& z);
}  // namespace fd

/// Canonical symplectic matrix [[0, I], [-I, 0]] of size dim.
Matrix symplectic_matrix(std::size_t dim);

/// J * g for the canonical J without forming the matrix.
Vector apply_symplectic(const Vector& g);

VectorField hamiltonian_vector_field(const ScalarField& h);

/// Canonical bracket {f, g}(z) = grad f . J grad g.
double poisson_bracket(const ScalarField& f, const ScalarField& g, const Vector& z);

/// Fixed-step classical RK4 advance of z' = X(z) over time t (t may be negative).
PhasePoint flow(const VectorField& field, const PhasePoint& z0, double t, int step_count);

struct FlowWithTangent {
  Vector point;
  Matrix tangent;  // d(point)/d(z0)
};

/// RK4 advance of the state together with its variational equation. The
/// tangent is the exact derivative of the discrete RK4 map when the field
/// Jacobian is exact.
FlowWithTangent flow_with_tangent(const VectorField& field, const Vector& z0, double t,
                                  int step_count);

/// (exp(lambda X)_* h)(z) = h(exp(-lambda X)(z)).
double pullback_eval(const VectorField& field, double lambda, const ScalarField& h,
                     const PhasePoint& z, int step_count);

}  // namespace stochacc
