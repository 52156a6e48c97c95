#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "stochacc/phase_space.hpp"
#include "stochacc/sde.hpp"

namespace stochacc {

/// One-particle generator  A phi = a_ito . grad phi + D : grad grad phi.
struct GeneratorCoefficients {
  std::function<Vector(const Vector&)> ito_drift;
  std::function<Matrix(const Vector&)> diffusion;
};

/// a_ito = a + 1/2 sum_k (grad b_k) b_k, D = 1/2 sum_k b_k (x) b_k.
GeneratorCoefficients generator_coefficients(const LangevinModel& model);

/// sum_k b_k(z1) (x) b_k(z2).
Matrix cross_diffusion(const LangevinModel& model, const Vector& z1, const Vector& z2);

using CovarianceSource = std::function<Matrix(const Vector&, const Vector&)>;

/// max over pairs of |C_model - scale * alpha|_F / |scale * alpha|_F.
double cross_diffusion_residual(const LangevinModel& model, const CovarianceSource& alpha,
                                double scale,
                                const std::vector<std::pair<Vector, Vector>>& test_pairs);

/// First and second moments of the Example 1 linear SDE in 3-D,
/// coordinates (x, v).
struct LinearMoments {
  Vector mean;        // 6
  Matrix covariance;  // 6 x 6
};

/// Exact moments at time t of dx = v dt + a dW, dv = c dW with a = m1/sqrt(3 tau),
/// c = m0/sqrt(3 tau).
LinearMoments example1_moment_odes(double m0, double m1, double tau, const LinearMoments& initial,
                                   double t);

/// (A phi)(z); second derivatives of phi from its Hessian (analytic or
/// central differences of the gradient, fd::step).
double generator_apply(const LangevinModel& model, const ScalarField& phi, const Vector& z);

/// Trace of the Jacobian of X at z.
double divergence(const VectorField& field, const Vector& z);

}  // namespace stochacc
