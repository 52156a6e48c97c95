#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stochacc/fokker_planck.hpp"
#include "stochacc/models.hpp"
#include "stochacc/sde.hpp"
#include "stochacc/stats.hpp"
#include "test_support.hpp"

using namespace stochacc;
using std::numbers::pi;
using testing::random_point;

namespace {

ScalarField quadratic_hamiltonian(double a, double b, double c) {
  // H = a q^2/2 + b q p + c p^2/2 on R^2.
  return ScalarField(
      2, [=](const Vector& z) { return 0.5 * a * z[0] * z[0] + b * z[0] * z[1] + 0.5 * c * z[1] * z[1]; },
      [=](const Vector& z) { return Vector(Eigen::Vector2d(a * z[0] + b * z[1], b * z[0] + c * z[1])); });
}

Matrix step_jacobian(const std::function<Vector(const Vector&)>& step, const Vector& z) {
  return fd::jacobian(step, z);
}

double symplectic_residual(const Matrix& m) {
  const Matrix j = symplectic_matrix(static_cast<std::size_t>(m.rows()));
  return (m.transpose() * j * m - j).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("ballistic Heun step without noise") {
  const LangevinModel m = LangevinModel::hamiltonian(free_particle_hamiltonian(1), {});
  const Vector z = Eigen::Vector2d(0.5, 2.0);
  const Vector out = euler_heun_step(m, z, 0.1, Vector(0));
  CHECK(out[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(out[1] == 2.0);
  CHECK_THROWS_AS(euler_heun_step(m, z, -0.1, Vector(0)), std::invalid_argument);
}

TEST_CASE("pulse model single step from the origin") {
  PulsePlasmaConfig cfg;
  cfg.tau = 2.0;
  cfg.strength = 1.3;
  const LangevinModel m = example1_model(cfg);
  CHECK(m.channels() == 3);
  const Vector dw = Eigen::Vector3d(0.3, -0.1, 0.25);
  const double a = cfg.m1() / std::sqrt(3.0 * cfg.tau);
  const double c = cfg.m0() / std::sqrt(3.0 * cfg.tau);
  const Vector z0 = Vector::Zero(6);
  const double h = 0.01;
  for (Scheme s : {Scheme::euler_heun, Scheme::midpoint}) {
    const Vector z = s == Scheme::euler_heun ? euler_heun_step(m, z0, h, dw) : midpoint_step(m, z0, h, dw, 1e-14, 50);
    // dx = v h + a dW with v averaged over the step: v = c dW at the end, 0 at the start.
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(z[3 + i] - c * dw[i]) < 1e-15);
      CHECK(std::abs(z[i] - (a * dw[i] + 0.5 * h * c * dw[i])) < 1e-15);
    }
  }
}

TEST_CASE("zero increments reduce to deterministic Heun") {
  const LangevinModel m = hyperbolic_test_model(0.5, 1.0);
  const Vector z = Eigen::Vector2d(1.2, -0.4);
  const double h = 0.05;
  const Vector a0 = m.drift_at(z);
  const Vector pred = z + h * a0;
  const Vector heun = z + 0.5 * h * (a0 + m.drift_at(pred));
  CHECK((euler_heun_step(m, z, h, Vector::Zero(1)) - heun).norm() < 1e-15);
}

TEST_CASE("midpoint step is symplectic") {
  const LangevinModel quad = LangevinModel::hamiltonian(quadratic_hamiltonian(1.0, 0.3, 2.0), {});
  const Vector z = Eigen::Vector2d(0.4, -0.9);
  auto step = [&](const Vector& x) { return midpoint_step(quad, x, 0.1, Vector(0), 1e-13, 100); };
  CHECK(symplectic_residual(step_jacobian(step, z)) <= 1e-10);

  SUBCASE("nonlinear Hamiltonian with noise") {
    KarneyConfig cfg;
    const LangevinModel m = example2_model(cfg);
    const Vector dw = Eigen::Vector2d(0.2, -0.15);
    auto s = [&](const Vector& x) { return midpoint_step(m, x, 0.1, dw, 1e-13, 100); };
    for (std::uint64_t i = 0; i < 5; ++i) {
      const Vector zi = Eigen::Vector2d(0.3 + i, 2.0 + 1.5 * i);
      CHECK(symplectic_residual(step_jacobian(s, zi)) <= 1e-8);
    }
  }

  SUBCASE("Heun is not symplectic") {
    auto h = [&](const Vector& x) { return euler_heun_step(quad, x, 0.1, Vector(0)); };
    CHECK(symplectic_residual(step_jacobian(h, z)) > 1e-6);
  }
}

TEST_CASE("midpoint iteration counts") {
  KarneyConfig cfg;
  const LangevinModel m = example2_model(cfg);
  const WienerDriver w(3, m.channels());
  int worst = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const Vector z = Eigen::Vector2d(random_point(9, i, 1)[0] * pi, cfg.i_lo + (cfg.i_hi - cfg.i_lo) * (i % 17) / 16.0);
    int it = 0;
    midpoint_step(m, z, 0.1, w.increments(i, 0, 0.1), 1e-12, 50, &it);
    worst = std::max(worst, it);
  }
  CHECK(worst <= 8);
  const Vector z = Eigen::Vector2d(0.1, 3.0);
  CHECK_THROWS_AS(midpoint_step(m, z, 0.1, w.increments(0, 0, 0.1), 1e-12, 1), StepFailure);
}

TEST_CASE("integration bookkeeping") {
  const LangevinModel m = hyperbolic_test_model(0.5, 1.0);
  const WienerDriver w(1, 1);
  const Vector z0 = Eigen::Vector2d(1.0, 1.0);
  const auto none = integrate(m, z0, 0.0, 0.1, w, 0);
  REQUIRE(none.size() == 1);
  CHECK(none[0].z == z0);
  CHECK(none[0].t == 0.0);

  const auto path = integrate(m, z0, 1.0, 0.1, w, 4);
  REQUIRE(path.size() == 11);
  for (std::size_t i = 0; i < path.size(); ++i) {
    CHECK(path[i].step == static_cast<std::int64_t>(i));
    CHECK(path[i].t == doctest::Approx(0.1 * static_cast<double>(i)).epsilon(1e-14));
    CHECK(path[i].drift_energy == doctest::Approx(0.5 * path[i].z[0] * path[i].z[1]));
  }
  CHECK(integrate(m, z0, 1.0, 0.1, w, 4).back().z == path.back().z);
  CHECK(integrate(m, z0, 1.0, 0.1, w, 5).back().z != path.back().z);

  IntegrateOptions sparse;
  sparse.record_every = 4;
  const auto thin = integrate(m, z0, 1.0, 0.1, w, 4, sparse);
  REQUIRE(thin.size() == 4);
  CHECK(thin[1].step == 4);
  CHECK(thin.back().step == 10);
  CHECK(thin.back().z == path.back().z);

  CHECK_THROWS_AS(step_count(1.0, 0.3), std::invalid_argument);
  CHECK(step_count(1.0, 0.1) == 10);
  CHECK(scheme_from_string("midpoint") == Scheme::midpoint);
  CHECK(scheme_from_string(to_string(Scheme::euler_heun)) == Scheme::euler_heun);
  CHECK_THROWS_AS(scheme_from_string("rk4"), std::invalid_argument);
}

TEST_CASE("step failures carry the step index") {
  const VectorField drift = VectorField::raw(2, [](const Vector& z) {
    return Vector(Eigen::Vector2d(z[0] > 2.0 ? std::nan("") : 1.0, 0.0));
  });
  const LangevinModel m(drift, {});
  const WienerDriver w(1, 0);
  try {
    integrate(m, Eigen::Vector2d(0.0, 0.0), 5.0, 0.5, w, 0);
    FAIL("expected failure");
  } catch (const StepFailure& e) {
    CHECK(e.step() >= 3);
    CHECK(e.step() <= 5);
    CHECK(e.h() == 0.5);
  }
}

TEST_CASE("Wiener increments") {
  const WienerDriver w(77, 3);
  CHECK(w.increments(5, 6, 0.01) == w.increments(5, 6, 0.01));
  CHECK(w.increment(5, 6, 1, 0.01) != w.increment(5, 7, 1, 0.01));
  const int n = 100000;
  const double h = 0.01;
  Matrix rows(n, 3);
  for (int i = 0; i < n; ++i) rows.row(i) = w.increments(static_cast<std::uint64_t>(i % 100), static_cast<std::uint64_t>(i / 100), h).transpose();
  const Matrix cov = rows.transpose() * rows / n;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      // Var of a product of independent N(0, h) draws is h^2; of a square, 2 h^2.
      const double se = (a == b ? std::sqrt(2.0) : 1.0) * h / std::sqrt(static_cast<double>(n));
      CHECK(std::abs(cov(a, b) - (a == b ? h : 0.0)) <= 3.0 * se);
    }
  }
}

TEST_CASE("pulse model velocity variance") {
  PulsePlasmaConfig cfg;
  const LangevinModel m = example1_model(cfg);
  const WienerDriver w(2024, 3);
  const double t = 10.0 * cfg.tau;
  const int n = 10000;
  IntegrateOptions opt;
  opt.record_every = 1000;
  std::vector<std::vector<PathState>> paths;
  for (int i = 0; i < n; ++i) paths.push_back(integrate(m, Vector::Zero(6), t, cfg.tau / 10.0, w, static_cast<std::uint64_t>(i), opt));
  const EnsembleSummary s = estimate_moments(paths, {}, {t});
  const double oracle = cfg.m0() * cfg.m0() * t / (3.0 * cfg.tau);
  for (int i = 3; i < 6; ++i) {
    CHECK(std::abs(s.slices[0].covariance(i, i) - oracle) <= 3.0 * s.slices[0].covariance_se(i, i));
  }
}

TEST_CASE("noise-free lower-hybrid model keeps the action") {
  KarneyConfig cfg;
  const LangevinModel full = example2_model(cfg);
  const LangevinModel m = LangevinModel::hamiltonian(*full.drift_hamiltonian(), {});
  const WienerDriver w(1, 0);
  const double action = 4.0;
  const auto path = integrate(m, Eigen::Vector2d(0.2, action), 10.0, 0.1, w, 0);
  const double rate = 1.0 + cfg.epsilon * cfg.epsilon / (2.0 * pi) * karney_s2_series(cfg, action).d_action;
  CHECK(path.back().z[1] == action);
  CHECK(std::abs(path.back().z[0] - (0.2 + 10.0 * rate)) < 1e-10);
}

TEST_CASE("pairs share their increments") {
  PulsePlasmaConfig cfg;
  const LangevinModel m = example1_model(cfg);
  const WienerDriver w(11, 3);
  const Vector za = random_point(61, 0, 6), zb = random_point(61, 1, 6);
  const auto [a, b] = integrate_pair(m, za, zb, 5.0, 0.1, w, 17);
  const auto [c, d] = integrate_pair(m, za, za, 5.0, 0.1, w, 17);
  CHECK(c.back().z == d.back().z);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i].t;
    CHECK((a[i].z.tail(3) - b[i].z.tail(3) - (za - zb).tail(3)).norm() < 1e-12);
    CHECK((a[i].z.head(3) - b[i].z.head(3) - (za - zb).head(3) - t * (za - zb).tail(3)).norm() < 1e-11);
  }
  // Each member of a pair is the single-particle path with the same key.
  CHECK(integrate(m, za, 5.0, 0.1, w, 17).back().z == a.back().z);
  CHECK(integrate(m, zb, 5.0, 0.1, w, 17).back().z == b.back().z);
}

TEST_CASE("rotated channels decorrelate pairs") {
  PulsePlasmaConfig pulse;
  const LangevinModel m = counterexample_model(counterexample_x1(pulse));
  const WienerDriver w(5, m.channels());
  const int n = 10000;
  std::vector<double> dv0, dvt;
  Vector za = Vector::Zero(6), zb = Vector::Zero(6);
  zb[0] = 1.0;
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = integrate_pair(m, za, zb, 5.0, 0.1, w, static_cast<std::uint64_t>(i));
    dvt.push_back(a.back().z[3] - b.back().z[3]);
  }
  const ScalarEstimate v = estimate_variance(dvt);
  CHECK(v.mean >= 5.0 * v.se);
  CHECK(v.mean > 0.0);

  SUBCASE("marginals match the pulse model") {
    // A single particle in the rotated model has the pulse-model law (h = 0.1 shows a 5% weak bias).
    std::vector<double> va;
    for (int i = 0; i < n; ++i) va.push_back(integrate(m, zb, 5.0, 0.05, w, static_cast<std::uint64_t>(i)).back().z[3]);
    const ScalarEstimate e = estimate_variance(va);
    const double oracle = pulse.m0() * pulse.m0() * 5.0 / (3.0 * pulse.tau);
    CHECK(std::abs(e.mean - oracle) <= 3.0 * e.se);
  }
}

TEST_CASE("Heun minus Maruyama drift is the Ito correction") {
  // Mean one-step difference over shared increments, divided by h.
  struct Case {
    LangevinModel model;
    Vector z;
  };
  PulsePlasmaConfig pulse;
  Vector zc = random_point(3, 3, 6);
  const std::vector<Case> cases = {{hyperbolic_test_model(0.5, 1.0), Eigen::Vector2d(0.8, -1.3)},
                                   {counterexample_model(counterexample_x1(pulse)), zc}};
  for (const Case& c : cases) {
    const GeneratorCoefficients g = generator_coefficients(c.model);
    const Vector correction = g.ito_drift(c.z) - c.model.drift_at(c.z);
    const WienerDriver w(8, c.model.channels());
    const double h = 1e-3;
    const int n = 200000;
    const auto d = static_cast<Eigen::Index>(c.model.dim());
    std::vector<std::vector<double>> diff(static_cast<std::size_t>(d));
    for (int i = 0; i < n; ++i) {
      const Vector dw = w.increments(static_cast<std::uint64_t>(i), 0, h);
      const Vector e = (euler_heun_step(c.model, c.z, h, dw) - euler_maruyama_step(c.model, c.z, h, dw)) / h;
      for (Eigen::Index k = 0; k < d; ++k) diff[static_cast<std::size_t>(k)].push_back(e[k]);
    }
    for (Eigen::Index k = 0; k < d; ++k) {
      const ScalarEstimate est = estimate_mean(diff[static_cast<std::size_t>(k)]);
      CHECK(std::abs(est.mean - correction[k]) <= 3.0 * est.se + 1e-12);
    }
  }
}

TEST_CASE("Heun has weak order one") {
  // Control variate: the exact path q0 exp(lambda t + sigma W) on the same increments.
  const double lambda = 0.5, sigma = 1.0, t_end = 1.0;
  const LangevinModel m = hyperbolic_test_model(lambda, sigma);
  const WienerDriver w(99, 1);
  const Vector z0 = Eigen::Vector2d(1.0, 1.0);
  const std::vector<double> hs = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> errors;
  const int n = 20000;
  for (double h : hs) {
    const std::int64_t steps = step_count(t_end, h);
    std::vector<double> d;
    for (int i = 0; i < n; ++i) {
      Vector z = z0;
      double wsum = 0.0;
      for (std::int64_t s = 0; s < steps; ++s) {
        const Vector dw = w.increments(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(s), h);
        z = euler_heun_step(m, z, h, dw);
        wsum += dw[0];
      }
      const double e = std::exp(lambda * t_end + sigma * wsum);
      d.push_back(z.squaredNorm() - (e * e + 1.0 / (e * e)));
    }
    const ScalarEstimate est = estimate_mean(d);
    CHECK(std::abs(est.mean) > 5.0 * est.se);
    errors.push_back(std::abs(est.mean));
  }
  const OrderFit fit = weak_order_fit(hs, errors);
  CHECK(fit.slope >= 0.8);
  CHECK(fit.slope <= 1.2);
}
