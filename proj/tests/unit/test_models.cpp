#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stochacc/bessel.hpp"
#include "stochacc/fokker_planck.hpp"
#include "stochacc/models.hpp"
#include "stochacc/stats.hpp"
#include "test_support.hpp"

using namespace stochacc;
using std::numbers::pi;
using testing::random_point;

namespace {

// Trapezoid rule on a fine uniform grid.
double trapezoid(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) s += f(a + i * h);
  return s * h;
}

}  // namespace

TEST_CASE("pulse config validation and moments") {
  PulsePlasmaConfig cfg;
  cfg.tau = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.tau = 2.0;
  cfg.strength = 0.8;
  cfg.window = PulseWindow::bump;
  for (bool unit : {true, false}) {
    cfg.unit_area = unit;
    const double m0 = cfg.strength * trapezoid([&](double s) { return cfg.window_value(s); }, 0.0, cfg.tau);
    const double m1 = cfg.strength * trapezoid([&](double s) { return (cfg.tau - s) * cfg.window_value(s); }, 0.0, cfg.tau);
    CHECK(std::abs(cfg.m0() - m0) <= 1e-8 * m0);
    CHECK(std::abs(cfg.m1() - m1) <= 1e-8 * m1);
  }
}

TEST_CASE("pulse micro simulator") {
  PulsePlasmaConfig cfg;
  cfg.tau = 1.5;
  cfg.strength = 0.7;
  cfg.window = PulseWindow::bump;
  const Vector z0 = random_point(3, 0, 6);

  const auto none = example1_micro_run(cfg, z0, 0, 1);
  REQUIRE(none.size() == 1);
  CHECK(none[0] == z0);

  PulsePlasmaConfig still = cfg;
  still.strength = 0.0;
  const auto free = example1_micro_run(still, z0, 4, 1);
  CHECK((free.back().head(3) - z0.head(3) - 4.0 * cfg.tau * z0.tail(3)).norm() < 1e-13);

  // One pulse against a time-resolved integral of the windowed force.
  const auto one = example1_micro_run(cfg, z0, 1, 9, 2);
  const Eigen::Vector3d dir = pulse_direction(9, 2, 1);
  const double dv = cfg.strength * trapezoid([&](double s) { return cfg.window_value(s); }, 0.0, cfg.tau);
  const double dx = cfg.strength * trapezoid([&](double s) { return (cfg.tau - s) * cfg.window_value(s); }, 0.0, cfg.tau);
  CHECK((one[1].tail(3) - (z0.tail(3) - dv * dir)).norm() < 1e-8);
  CHECK((one[1].head(3) - (z0.head(3) + cfg.tau * z0.tail(3) - dx * dir)).norm() < 1e-8);

  // Energy change per pulse is the impulse work.
  const auto run = example1_micro_run(cfg, z0, 20, 9, 3);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Vector3d d = pulse_direction(9, 3, static_cast<std::uint64_t>(k) + 1);
    const Vector& v = run[static_cast<std::size_t>(k)];
    const Vector& vn = run[static_cast<std::size_t>(k) + 1];
    const double de = 0.5 * vn.tail(3).squaredNorm() - 0.5 * v.tail(3).squaredNorm();
    CHECK(std::abs(de - (-cfg.m0() * d.dot(v.tail(3)) + 0.5 * cfg.m0() * cfg.m0())) < 1e-12);
  }
}

TEST_CASE("pulse directions are uniform on the sphere") {
  const int n = 20000;
  Matrix rows(n, 3);
  for (int i = 0; i < n; ++i) rows.row(i) = pulse_direction(4, static_cast<std::uint64_t>(i), 1).transpose();
  const MomentSlice s = sample_moments(rows);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(rows.row(i).norm() - 1.0) < 1e-14);
    CHECK(std::abs(s.mean[i]) <= 3.0 * s.mean_se[i]);
    for (int j = 0; j < 3; ++j) {
      const double second = s.covariance(i, j) + s.mean[i] * s.mean[j];
      CHECK(std::abs(second - (i == j ? 1.0 / 3.0 : 0.0)) <= 3.0 * s.covariance_se(i, j) + 1e-4);
    }
  }
}

TEST_CASE("pulse micro velocity variance after many pulses") {
  PulsePlasmaConfig cfg;
  const int pulses = 100, n = 10000;
  Matrix rows(n, 3);
  for (int i = 0; i < n; ++i) {
    rows.row(i) = example1_micro_run(cfg, Vector::Zero(6), pulses, 12, static_cast<std::uint64_t>(i)).back().tail(3).transpose();
  }
  const MomentSlice s = sample_moments(rows);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(s.covariance(i, i) - pulses * cfg.m0() * cfg.m0() / 3.0) <= 3.0 * s.covariance_se(i, i));
  }
}

TEST_CASE("pulse Langevin model") {
  PulsePlasmaConfig cfg;
  cfg.tau = 0.8;
  cfg.strength = 1.4;
  const LangevinModel m = example1_model(cfg);
  CHECK(m.is_hamiltonian());
  CHECK(m.channels() == 3);
  const Vector z = random_point(2, 0, 6);
  const Matrix b = m.noise_at(z);
  for (Eigen::Index k = 0; k < 3; ++k) {
    for (Eigen::Index i = 0; i < 3; ++i) {
      CHECK(b(3 + i, k) == doctest::Approx(i == k ? cfg.m0() / std::sqrt(3.0 * cfg.tau) : 0.0));
      CHECK(b(i, k) == doctest::Approx(i == k ? cfg.m1() / std::sqrt(3.0 * cfg.tau) : 0.0));
    }
    const double hk = (cfg.m1() * z[3 + k] - cfg.m0() * z[k]) / std::sqrt(3.0) / std::sqrt(cfg.tau);
    CHECK(m.noise_hamiltonian(static_cast<std::size_t>(k))->value(z) == doctest::Approx(hk).epsilon(1e-14));
  }
  Vector ballistic = Vector::Zero(6);
  ballistic.head(3) = z.tail(3);
  CHECK((m.drift_at(z) - ballistic).norm() < 1e-15);

  PulsePlasmaConfig off = cfg;
  off.strength = 0.0;
  CHECK(example1_model(off).noise_at(z).norm() == 0.0);
}

TEST_CASE("rotated-channel model") {
  PulsePlasmaConfig pulse;
  pulse.tau = 1.2;
  const LangevinModel base = example1_model(pulse);
  const GeneratorCoefficients gb = generator_coefficients(base);

  CounterexampleConfig zero;
  zero.pulse = pulse;
  CounterexampleConfig third = zero;
  third.constant = pi / 3.0;
  CounterexampleConfig linear = counterexample_x1(pulse);
  CounterexampleConfig custom = zero;
  custom.phase = CounterexampleConfig::Phase::custom;
  custom.custom_value = [](const Vector& z) { return std::sin(z[1]) * z[4]; };
  custom.custom_gradient = [](const Vector& z) {
    Vector g = Vector::Zero(6);
    g[1] = std::cos(z[1]) * z[4];
    g[4] = std::sin(z[1]);
    return g;
  };

  for (const CounterexampleConfig* c : {&zero, &third, &linear, &custom}) {
    const LangevinModel m = counterexample_model(*c);
    CHECK(m.channels() == 6);
    const GeneratorCoefficients g = generator_coefficients(m);
    for (std::uint64_t i = 0; i < 10; ++i) {
      const Vector z = random_point(13, i, 6);
      CHECK((g.diffusion(z) - gb.diffusion(z)).norm() < 1e-14);
      CHECK((g.ito_drift(z) - gb.ito_drift(z)).norm() < 1e-12);
    }
  }
  const Vector z1 = random_point(14, 0, 6), z2 = random_point(14, 1, 6);
  for (const CounterexampleConfig* c : {&zero, &third}) {
    CHECK((cross_diffusion(counterexample_model(*c), z1, z2) - cross_diffusion(base, z1, z2)).norm() < 1e-14);
  }
  CHECK((cross_diffusion(counterexample_model(linear), z1, z2) - cross_diffusion(base, z1, z2)).norm() > 1e-3);

  CounterexampleConfig broken = zero;
  broken.phase = CounterexampleConfig::Phase::custom;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}

TEST_CASE("lower-hybrid config validation") {
  KarneyConfig cfg;
  cfg.delta = 0.7;
  try {
    cfg.validate();
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("delta") != std::string::npos);
  }
  cfg.delta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.delta = 0.2;
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(cfg.check_action(1e-4), std::domain_error);
  CHECK_NOTHROW(cfg.check_action(1e-2));
  CHECK(sinc(0.0) == 1.0);
}

TEST_CASE("lower-hybrid Langevin model") {
  KarneyConfig cfg;
  cfg.epsilon = 0.2;
  const LangevinModel m = example2_model(cfg);
  CHECK(m.is_hamiltonian());
  CHECK(m.channels() == 2);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const Vector z = Eigen::Vector2d(random_point(15, i, 1)[0] * pi, 1.0 + 0.8 * static_cast<double>(i));
    const double j = bessel_j(cfg.n0, std::sqrt(2.0 * z[1]));
    const double amp = cfg.epsilon * std::sqrt(pi) * sinc(pi * cfg.delta) * cfg.n0 * j;
    const Matrix b = m.noise_at(z);
    CHECK(std::abs(b(1, 0) - amp * std::sin(cfg.n0 * z[0])) <= 1e-12 * std::max(1.0, std::abs(amp)));
    CHECK(std::abs(b(1, 1) + amp * std::cos(cfg.n0 * z[0])) <= 1e-12 * std::max(1.0, std::abs(amp)));
    const Vector a = m.drift_at(z);
    CHECK(a[1] == 0.0);
    const double rate = 1.0 + cfg.epsilon * cfg.epsilon / (2.0 * pi) * karney_s2_series(cfg, z[1]).d_action;
    CHECK(std::abs(a[0] - rate) < 1e-12);
  }
  KarneyConfig off = cfg;
  off.epsilon = 0.0;
  const LangevinModel m0 = example2_model(off);
  const Vector z = Eigen::Vector2d(0.4, 3.0);
  CHECK(m0.noise_at(z).norm() == 0.0);
  CHECK(m0.drift_at(z)[0] == 1.0);
  CHECK(m0.drift_at(z)[1] == 0.0);
}

TEST_CASE("lower-hybrid micro simulator") {
  KarneyConfig cfg;
  SUBCASE("no wave keeps the action") {
    cfg.epsilon = 0.0;
    const auto run = example2_micro_run(cfg, Eigen::Vector2d(0.3, 5.0), 1000, 1, 0, 16);
    REQUIRE(run.size() == 1001);
    for (const Vector& z : run) CHECK(std::abs(z[1] - 5.0) <= 1e-12);
    CHECK(std::abs(run.back()[0] - (0.3 + 1000 * 2.0 * pi)) <= 1e-8);
  }
  SUBCASE("one period matches first-order perturbation theory") {
    cfg.epsilon = 1e-3;
    cfg.n0 = 3;
    const double th0 = 0.9, i0 = 4.0;
    for (std::uint64_t sample = 0; sample < 4; ++sample) {
      const auto run = example2_micro_run(cfg, Eigen::Vector2d(th0, i0), 1, 21, sample, 400);
      const double eta = 2.0 * pi * rng::CounterRng(21, rng::Stream::wave_phase, sample, 1).uniform();
      const double rho = std::sqrt(2.0 * i0);
      const double nu = cfg.nu();
      const double first = cfg.epsilon * trapezoid(
          [&](double t) { return std::cos(rho * std::sin(th0 + t) - nu * t - eta) * rho * std::cos(th0 + t); },
          0.0, 2.0 * pi);
      CHECK(std::abs(run[1][1] - i0 - first) <= 50.0 * cfg.epsilon * cfg.epsilon);
    }
  }
  SUBCASE("negative action fails") {
    cfg.epsilon = 3.0;
    CHECK_THROWS_AS(example2_micro_run(cfg, Eigen::Vector2d(0.0, 0.02), 20, 1, 0, 200), IntegrationFailure);
  }
}

TEST_CASE("hyperbolic test model follows its pathwise solution") {
  const double lambda = 0.5, sigma = 1.0, h = 1e-3;
  const LangevinModel m = hyperbolic_test_model(lambda, sigma);
  const WienerDriver w(3, 1);
  const auto path = integrate(m, Eigen::Vector2d(1.0, 2.0), 1.0, h, w, 0);
  double wsum = 0.0;
  for (std::int64_t s = 0; s < 1000; ++s) wsum += w.increment(0, static_cast<std::uint64_t>(s), 0, h);
  const double e = std::exp(lambda + sigma * wsum);
  CHECK(std::abs(path.back().z[0] - e) <= 5e-3 * e);
  CHECK(std::abs(path.back().z[1] - 2.0 / e) <= 5e-3 * 2.0 / e);
}
