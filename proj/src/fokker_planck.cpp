#include "stochacc/fokker_planck.hpp"

#include <cmath>
#include <memory>

namespace stochacc {

GeneratorCoefficients generator_coefficients(const LangevinModel& model) {
  auto m = std::make_shared<const LangevinModel>(model);
  GeneratorCoefficients g;
  g.ito_drift = [m](const Vector& z) {
    Vector a = m->drift_at(z);
    for (const VectorField& b : m->noise_fields()) a.noalias() += 0.5 * (b.jacobian(z) * b(z));
    return a;
  };
  g.diffusion = [m](const Vector& z) {
    const Matrix b = m->noise_at(z);
    return Matrix(0.5 * b * b.transpose());
  };
  return g;
}

Matrix cross_diffusion(const LangevinModel& model, const Vector& z1, const Vector& z2) {
  return model.noise_at(z1) * model.noise_at(z2).transpose();
}

double cross_diffusion_residual(const LangevinModel& model, const CovarianceSource& alpha,
                                double scale,
                                const std::vector<std::pair<Vector, Vector>>& test_pairs) {
  double worst = 0.0;
  for (const auto& [z1, z2] : test_pairs) {
    const Matrix target = scale * alpha(z1, z2);
    const double err = (cross_diffusion(model, z1, z2) - target).norm();
    const double denom = target.norm();
    worst = std::max(worst, denom > 0.0 ? err / denom : err);
  }
  return worst;
}

LinearMoments example1_moment_odes(double m0, double m1, double tau, const LinearMoments& initial,
                                   double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("example1_moment_odes: t must be >= 0");
  if (initial.mean.size() != 6 || initial.covariance.rows() != 6 || initial.covariance.cols() != 6) {
    throw std::invalid_argument("example1_moment_odes: expects 6-D (x, v) moments");
  }
  const double a = m1 / std::sqrt(3.0 * tau);
  const double c = m0 / std::sqrt(3.0 * tau);
  Matrix phi = Matrix::Identity(6, 6);
  phi.topRightCorner(3, 3) = t * Matrix::Identity(3, 3);
  const Matrix id = Matrix::Identity(3, 3);
  Matrix q(6, 6);
  q.topLeftCorner(3, 3) = (a * a * t + a * c * t * t + c * c * t * t * t / 3.0) * id;
  q.topRightCorner(3, 3) = (a * c * t + c * c * t * t / 2.0) * id;
  q.bottomLeftCorner(3, 3) = q.topRightCorner(3, 3);
  q.bottomRightCorner(3, 3) = (c * c * t) * id;
  return {phi * initial.mean, phi * initial.covariance * phi.transpose() + q};
}

double generator_apply(const LangevinModel& model, const ScalarField& phi, const Vector& z) {
  const GeneratorCoefficients g = generator_coefficients(model);
  const double first = g.ito_drift(z).dot(phi.gradient(z));
  if (model.channels() == 0) return first;
  return first + g.diffusion(z).cwiseProduct(phi.hessian(z)).sum();
}

double divergence(const VectorField& field, const Vector& z) {
  return fd::jacobian([&](const Vector& y) { return field(y); }, z).trace();
}

}  // namespace stochacc
