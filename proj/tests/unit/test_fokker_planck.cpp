#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stochacc/bessel.hpp"
#include "stochacc/fokker_planck.hpp"
#include "stochacc/models.hpp"
#include "stochacc/noise_basis.hpp"
#include "stochacc/stats.hpp"
#include "test_support.hpp"

using namespace stochacc;
using std::numbers::pi;
using testing::random_point;

namespace {

ScalarField coordinate(std::size_t dim, Eigen::Index k, int power) {
  return ScalarField(
      dim, [k, power](const Vector& z) { return std::pow(z[k], power); },
      [dim, k, power](const Vector& z) {
        Vector g = Vector::Zero(static_cast<Eigen::Index>(dim));
        g[k] = power * std::pow(z[k], power - 1);
        return g;
      });
}

}  // namespace

TEST_CASE("pulse model generator coefficients") {
  PulsePlasmaConfig cfg;
  cfg.tau = 1.7;
  cfg.strength = 0.9;
  const GeneratorCoefficients g = generator_coefficients(example1_model(cfg));
  const double m0 = cfg.m0(), m1 = cfg.m1(), t6 = 6.0 * cfg.tau;
  const Matrix i3 = Matrix::Identity(3, 3);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const Vector z = random_point(2, i, 6);
    Vector expect = Vector::Zero(6);
    expect.head(3) = z.tail(3);
    CHECK((g.ito_drift(z) - expect).norm() < 1e-10);
    const Matrix d = g.diffusion(z);
    CHECK((d.topLeftCorner(3, 3) - m1 * m1 / t6 * i3).norm() < 1e-14);
    CHECK((d.topRightCorner(3, 3) - m0 * m1 / t6 * i3).norm() < 1e-14);
    CHECK((d.bottomLeftCorner(3, 3) - m0 * m1 / t6 * i3).norm() < 1e-14);
    CHECK((d.bottomRightCorner(3, 3) - m0 * m0 / t6 * i3).norm() < 1e-14);
  }
}

TEST_CASE("Ito correction of a quadratic noise Hamiltonian") {
  // H = q^2/2 + 0.4 q p - p^2/3; b = J grad H is linear, so (grad b) b is linear.
  const ScalarField h(
      2, [](const Vector& z) { return 0.5 * z[0] * z[0] + 0.4 * z[0] * z[1] - z[1] * z[1] / 3.0; },
      [](const Vector& z) { return Vector(Eigen::Vector2d(z[0] + 0.4 * z[1], 0.4 * z[0] - 2.0 * z[1] / 3.0)); });
  const LangevinModel m = LangevinModel::hamiltonian(free_particle_hamiltonian(1), {h});
  const GeneratorCoefficients g = generator_coefficients(m);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const Vector z = random_point(4, i, 2);
    const VectorField& b = m.noise(0);
    const Vector oracle = m.drift_at(z) + 0.5 * fd::jacobian([&](const Vector& x) { return b(x); }, z) * b(z);
    CHECK((g.ito_drift(z) - oracle).norm() <= 1e-8);
  }
}

TEST_CASE("zero noise generator") {
  const LangevinModel m = LangevinModel::hamiltonian(free_particle_hamiltonian(2), {});
  const GeneratorCoefficients g = generator_coefficients(m);
  const Vector z = random_point(5, 0, 4);
  CHECK(g.ito_drift(z) == m.drift_at(z));
  CHECK(g.diffusion(z).norm() == 0.0);
  Vector c(4);
  c << 1.0, -2.0, 0.5, 3.0;
  const ScalarField phi(4, [c](const Vector& x) { return c.dot(x); }, [c](const Vector&) { return c; });
  CHECK(generator_apply(m, phi, z) == doctest::Approx(m.drift_at(z).dot(c)).epsilon(1e-12));
}

TEST_CASE("diffusion is half the coincident cross-diffusion and positive") {
  KarneyConfig kc;
  PulsePlasmaConfig pc;
  const std::vector<LangevinModel> models = {example1_model(pc), example2_model(kc),
                                             counterexample_model(counterexample_x1(pc)),
                                             hyperbolic_test_model(0.5, 1.0)};
  for (const LangevinModel& m : models) {
    const GeneratorCoefficients g = generator_coefficients(m);
    for (std::uint64_t i = 0; i < 10; ++i) {
      Vector z = random_point(6, i, static_cast<Eigen::Index>(m.dim()));
      if (m.name() == "example2") z[1] = 1.0 + std::abs(z[1]) * 3.0;
      const Matrix d = g.diffusion(z);
      CHECK((d - 0.5 * cross_diffusion(m, z, z)).norm() == 0.0);
      CHECK((d - d.transpose()).norm() == 0.0);
      CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(d).eigenvalues().minCoeff() >= -1e-12);
    }
  }
}

TEST_CASE("Hamiltonian drifts are divergence free") {
  KarneyConfig kc;
  PulsePlasmaConfig pc;
  for (const LangevinModel& m : {example1_model(pc), example2_model(kc), hyperbolic_test_model(0.5, 1.0)}) {
    for (std::uint64_t i = 0; i < 10; ++i) {
      Vector z = random_point(7, i, static_cast<Eigen::Index>(m.dim()));
      if (m.name() == "example2") z[1] = 1.0 + std::abs(z[1]) * 3.0;
      CHECK(std::abs(divergence(m.drift(), z)) <= 1e-6);
    }
  }
}

TEST_CASE("cross-diffusion residuals") {
  PulsePlasmaConfig cfg;
  cfg.tau = 1.3;
  std::vector<std::pair<Vector, Vector>> pairs;
  for (int i = 0; i < 10; ++i) pairs.emplace_back(random_point(8, 2 * i, 6), random_point(8, 2 * i + 1, 6));
  const CovarianceSource alpha = [&](const Vector& a, const Vector& b) { return example1_alpha(cfg, a, b); };
  CHECK(cross_diffusion_residual(example1_model(cfg), alpha, 1.0 / cfg.tau, pairs) <= 1e-10);
  CHECK(cross_diffusion_residual(counterexample_model(counterexample_x1(cfg)), alpha, 1.0 / cfg.tau, pairs) >= 0.1);

  SUBCASE("model from a sampled basis") {
    auto set = std::make_shared<SampleSet>(
        make_kick_ensemble(example1_perturbation(cfg, 3), free_particle_hamiltonian(3), 0, 500, 8, 0.5),
        ProbeGrid::box(Vector::Constant(6, -2.0), Vector::Constant(6, 2.0), std::vector<int>(6, 2)));
    const NoiseBasis basis = build_basis(set, {});
    auto fresh = std::make_shared<SampleSet>(
        make_kick_ensemble(example1_perturbation(cfg, 4), free_particle_hamiltonian(3), 0, 500, 8, 0.5), set->grid());
    const LangevinModel m = LangevinModel::from_kicks(free_particle_hamiltonian(3), ScalarField::zero(6),
                                                      basis.modes(), 1.0, cfg.tau);
    const CovarianceSource emp = [&](const Vector& a, const Vector& b) { return covariance(a, b, *fresh); };
    const double r = cross_diffusion_residual(m, emp, 1.0 / cfg.tau, pairs);
    CHECK(std::abs(r - reconstruction_residual(basis, *fresh, pairs)) <= 1e-12);
  }
}

TEST_CASE("linear moment equations") {
  LinearMoments init;
  init.mean = random_point(9, 0, 6);
  const Matrix a = Matrix::Random(6, 6) * 0.3;
  init.covariance = a * a.transpose();
  const LinearMoments same = example1_moment_odes(1.3, 0.7, 2.0, init, 0.0);
  CHECK((same.mean - init.mean).norm() == 0.0);
  CHECK((same.covariance - init.covariance).norm() < 1e-15);

  LinearMoments zero{Vector::Zero(6), Matrix::Zero(6, 6)};
  CHECK(example1_moment_odes(1.0, 0.0, 1.0, zero, 3.0).covariance(3, 3) == doctest::Approx(1.0).epsilon(1e-14));

  const LinearMoments still = example1_moment_odes(0.0, 0.9, 1.0, init, 2.0);
  CHECK((still.covariance.bottomRightCorner(3, 3) - init.covariance.bottomRightCorner(3, 3)).norm() < 1e-14);
}

TEST_CASE("linear moments agree with simulation") {
  // Fine-step trapezoid sums of dx = v dt + a dW, dv = c dW.
  const double m0 = 1.3, m1 = 0.7, tau = 2.0, t_end = 3.0, h = 0.005;
  const double a = m1 / std::sqrt(3.0 * tau), c = m0 / std::sqrt(3.0 * tau);
  LinearMoments init{Vector::Zero(6), Matrix::Zero(6, 6)};
  init.mean << 0.5, -1.0, 0.0, 0.3, 0.0, -0.2;
  const LinearMoments exact = example1_moment_odes(m0, m1, tau, init, t_end);
  const WienerDriver w(1, 3);
  const int n = 20000;
  const auto steps = static_cast<int>(std::lround(t_end / h));
  Matrix rows(n, 6);
  for (int p = 0; p < n; ++p) {
    Vector z = init.mean;
    for (int s = 0; s < steps; ++s) {
      const Vector dw = w.increments(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(s), h);
      const Vector v = z.tail(3);
      z.tail(3) += c * dw;
      z.head(3) += 0.5 * h * (v + z.tail(3)) + a * dw;
    }
    rows.row(p) = z.transpose();
  }
  const MomentSlice s = sample_moments(rows, t_end);
  for (int i = 0; i < 6; ++i) {
    CHECK(std::abs(s.mean[i] - exact.mean[i]) <= 3.0 * s.mean_se[i] + 1e-12);
    for (int j = 0; j < 6; ++j) {
      CHECK(std::abs(s.covariance(i, j) - exact.covariance(i, j)) <= 3.5 * s.covariance_se(i, j) + 1e-3);
    }
  }
}

TEST_CASE("lower-hybrid generator on the action") {
  KarneyConfig cfg;
  cfg.epsilon = 0.3;
  const LangevinModel m = example2_model(cfg);
  const GeneratorCoefficients g = generator_coefficients(m);
  const ScalarField i1 = coordinate(2, 1, 1), i2 = coordinate(2, 1, 2);
  const WienerDriver w(31, m.channels());
  const double h = 1e-4;
  const int n = 100000;
  for (const Vector& z : {Vector(Eigen::Vector2d(0.3, 4.0)), Vector(Eigen::Vector2d(2.1, 7.5))}) {
    const double a1 = generator_apply(m, i1, z);
    const double a2 = generator_apply(m, i2, z);
    CHECK(std::abs(a1 - g.ito_drift(z)[1]) < 1e-12);
    // 2 D_II from the noise coefficients.
    const double rho = std::sqrt(2.0 * z[1]);
    const double d2 = cfg.epsilon * cfg.epsilon * pi * std::pow(sinc(pi * cfg.delta) * cfg.n0 * bessel_j(cfg.n0, rho), 2);
    CHECK(std::abs(a2 - 2.0 * z[1] * a1 - d2) <= 1e-6 * d2);
    CHECK(std::abs(example2_diffusion_ii(cfg, z[1]) - 0.5 * d2) <= 1e-12 * d2);

    // Short-time estimators with the martingale part b . dW removed.
    std::vector<double> e1, e2;
    const Matrix b = m.noise_at(z);
    for (int i = 0; i < n; ++i) {
      const Vector dw = w.increments(static_cast<std::uint64_t>(i), 0, h);
      const Vector zn = euler_heun_step(m, z, h, dw);
      const double mart = b.row(1).dot(dw);
      const double di = zn[1] - z[1];
      e1.push_back((di - mart) / h);
      e2.push_back((zn[1] * zn[1] - z[1] * z[1] - 2.0 * z[1] * mart) / h);
    }
    const ScalarEstimate s1 = estimate_mean(e1), s2 = estimate_mean(e2);
    CHECK(std::abs(s1.mean - a1) <= 3.0 * s1.se + 1e-3 * std::abs(a1));
    CHECK(std::abs(s2.mean - a2) <= 3.0 * s2.se + 1e-3 * std::abs(a2));
  }
}

TEST_CASE("short-time generator limit is first order") {
  // Exact expectation for the hyperbolic model: E q_h^2 = q^2 exp((2 lambda + 2 sigma^2) h).
  const double lambda = 0.5, sigma = 0.8;
  const LangevinModel m = hyperbolic_test_model(lambda, sigma);
  const Vector z = Eigen::Vector2d(1.3, 0.4);
  const double gen = generator_apply(m, coordinate(2, 0, 2), z);
  const double k = 2.0 * lambda + 2.0 * sigma * sigma;
  CHECK(std::abs(gen - k * z[0] * z[0]) <= 1e-6);
  std::vector<double> hs = {0.04, 0.02, 0.01}, errs;
  for (double h : hs) errs.push_back(std::abs(z[0] * z[0] * (std::exp(k * h) - 1.0) / h - gen));
  const OrderFit fit = weak_order_fit(hs, errs);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.05));
}
