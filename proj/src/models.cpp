#include "stochacc/models.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "stochacc/bessel.hpp"
#include "stochacc/quadrature.hpp"
#include "stochacc/wiener.hpp"

namespace stochacc {

using std::numbers::pi;

ScalarField free_particle_hamiltonian(std::size_t dof) {
  const auto n = static_cast<Eigen::Index>(dof);
  return ScalarField(
      2 * dof, [n](const Vector& z) { return 0.5 * z.tail(n).squaredNorm(); },
      [n](const Vector& z) {
        Vector g = Vector::Zero(2 * n);
        g.tail(n) = z.tail(n);
        return g;
      },
      Provenance::analytic,
      [n](const Vector&) {
        Matrix h = Matrix::Zero(2 * n, 2 * n);
        h.bottomRightCorner(n, n).setIdentity();
        return h;
      });
}

// ---------------------------------------------------------------------------
// Example 1

void PulsePlasmaConfig::validate() const {
  if (!std::isfinite(strength)) throw std::invalid_argument("pulse strength must be finite");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("pulse interval tau must be positive");
}

double PulsePlasmaConfig::window_value(double s) const {
  if (s < 0.0 || s > tau) return 0.0;
  switch (window) {
    case PulseWindow::uniform: return unit_area ? 1.0 / tau : 1.0;
    case PulseWindow::bump: {
      const double b = std::sin(pi * s / tau);
      return (unit_area ? 2.0 / tau : 1.0) * b * b;
    }
  }
  return 0.0;
}

double PulsePlasmaConfig::m0() const {
  const QuadratureRule r = gauss_legendre(64, 0.0, tau);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * window_value(r.nodes[i]);
  return strength * acc;
}

double PulsePlasmaConfig::m1() const {
  const QuadratureRule r = gauss_legendre(64, 0.0, tau);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    acc += r.weights[i] * (tau - r.nodes[i]) * window_value(r.nodes[i]);
  }
  return strength * acc;
}

Eigen::Vector3d pulse_direction(std::uint64_t seed, std::uint64_t sample, std::uint64_t pulse) {
  return rng::CounterRng(seed, rng::Stream::pulse_direction, sample, pulse).unit_vector3();
}

PerturbationProcess example1_perturbation(const PulsePlasmaConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto sampler = [cfg](std::uint64_t s, std::uint64_t r) {
    const Eigen::Vector3d dir = pulse_direction(s, r, 0);
    PerturbationRealization out;
    out.value = [cfg, dir](double t, const Vector& z) {
      return cfg.strength * cfg.window_value(t) * dir.dot(z.head<3>());
    };
    out.gradient = [cfg, dir](double t, const Vector&) {
      Vector g = Vector::Zero(6);
      g.head<3>() = cfg.strength * cfg.window_value(t) * dir;
      return g;
    };
    return out;
  };
  return PerturbationProcess(6, cfg.tau, cfg.strength, cfg.tau, seed, sampler);
}

std::vector<Vector> example1_micro_run(const PulsePlasmaConfig& cfg, const Vector& z0,
                                       int pulse_count, std::uint64_t seed, std::uint64_t sample) {
  cfg.validate();
  if (pulse_count < 0) throw std::invalid_argument("example1_micro_run: pulse_count must be >= 0");
  if (z0.size() != 6) throw std::invalid_argument("example1_micro_run: state must be (x, v) in 3-D");
  const double m0 = cfg.m0();
  const double m1 = cfg.m1();
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(pulse_count) + 1);
  out.push_back(z0);
  Vector z = z0;
  for (int k = 0; k < pulse_count; ++k) {
    const Eigen::Vector3d dir = pulse_direction(seed, sample, static_cast<std::uint64_t>(k) + 1);
    const Eigen::Vector3d v = z.tail<3>();
    z.head<3>() += v * cfg.tau - m1 * dir;
    z.tail<3>() -= m0 * dir;
    out.push_back(z);
  }
  return out;
}

std::vector<ScalarField> example1_basis_hamiltonians(const PulsePlasmaConfig& cfg) {
  cfg.validate();
  const double m0 = cfg.m0();
  const double m1 = cfg.m1();
  const double s = 1.0 / std::sqrt(3.0);
  std::vector<ScalarField> out;
  for (Eigen::Index i = 0; i < 3; ++i) {
    Vector g = Vector::Zero(6);
    g[i] = -m0 * s;
    g[3 + i] = m1 * s;
    out.emplace_back(
        6, [g](const Vector& z) { return g.dot(z); }, [g](const Vector&) { return g; },
        Provenance::analytic, [](const Vector&) { return Matrix(Matrix::Zero(6, 6)); });
  }
  return out;
}

LangevinModel example1_model(const PulsePlasmaConfig& cfg) {
  std::vector<ScalarField> noise;
  for (const ScalarField& h : example1_basis_hamiltonians(cfg)) {
    noise.push_back((1.0 / std::sqrt(cfg.tau)) * h);
  }
  return LangevinModel::hamiltonian(free_particle_hamiltonian(3), noise, "example1");
}

Matrix example1_alpha(const PulsePlasmaConfig& cfg, const Vector&, const Vector&) {
  const double m0 = cfg.m0();
  const double m1 = cfg.m1();
  const Matrix id = Matrix::Identity(3, 3);
  Matrix a(6, 6);
  a.topLeftCorner(3, 3) = (m1 * m1 / 3.0) * id;
  a.topRightCorner(3, 3) = (m0 * m1 / 3.0) * id;
  a.bottomLeftCorner(3, 3) = (m0 * m1 / 3.0) * id;
  a.bottomRightCorner(3, 3) = (m0 * m0 / 3.0) * id;
  return a;
}

// ---------------------------------------------------------------------------
// Counterexample

void CounterexampleConfig::validate() const {
  pulse.validate();
  switch (phase) {
    case Phase::constant:
      if (!std::isfinite(constant)) throw std::invalid_argument("counterexample: constant phase must be finite");
      break;
    case Phase::linear:
      if (linear.size() != 6 || !linear.allFinite()) {
        throw std::invalid_argument("counterexample: linear phase needs 6 finite coefficients");
      }
      break;
    case Phase::custom:
      if (!custom_value || !custom_gradient) {
        throw std::invalid_argument("counterexample: custom phase needs value and gradient");
      }
      break;
  }
}

double CounterexampleConfig::phi(const Vector& z) const {
  switch (phase) {
    case Phase::constant: return constant;
    case Phase::linear: return linear.dot(z);
    case Phase::custom: return custom_value(z);
  }
  return 0.0;
}

Vector CounterexampleConfig::phi_gradient(const Vector& z) const {
  switch (phase) {
    case Phase::constant: return Vector::Zero(6);
    case Phase::linear: return linear;
    case Phase::custom: return custom_gradient(z);
  }
  return Vector::Zero(6);
}

CounterexampleConfig counterexample_x1(const PulsePlasmaConfig& pulse) {
  CounterexampleConfig cfg;
  cfg.pulse = pulse;
  cfg.phase = CounterexampleConfig::Phase::linear;
  cfg.linear = Vector::Zero(6);
  cfg.linear[0] = 1.0;
  return cfg;
}

LangevinModel counterexample_model(const CounterexampleConfig& cfg) {
  cfg.validate();
  const double m0 = cfg.pulse.m0();
  const double m1 = cfg.pulse.m1();
  const double s = 1.0 / std::sqrt(3.0 * cfg.pulse.tau);
  auto c = std::make_shared<const CounterexampleConfig>(cfg);
  std::vector<VectorField> noise;
  for (int rot = 0; rot < 2; ++rot) {
    for (Eigen::Index i = 0; i < 3; ++i) {
      Vector ci = Vector::Zero(6);
      ci[i] = m1 * s;
      ci[3 + i] = m0 * s;
      auto eval = [c, ci, rot](const Vector& z) {
        const double ph = c->phi(z);
        return Vector((rot == 0 ? std::cos(ph) : -std::sin(ph)) * ci);
      };
      auto jac = [c, ci, rot](const Vector& z) {
        const double ph = c->phi(z);
        const double d = rot == 0 ? -std::sin(ph) : -std::cos(ph);
        return Matrix(d * ci * c->phi_gradient(z).transpose());
      };
      noise.push_back(VectorField::raw(6, eval, jac));
    }
  }
  return LangevinModel(VectorField::hamiltonian(free_particle_hamiltonian(3)), std::move(noise),
                       "counterexample");
}

// ---------------------------------------------------------------------------
// Example 2

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

void KarneyConfig::validate() const {
  if (!(std::abs(delta) < 0.5)) {
    std::ostringstream os;
    os << "invalid harmonic offset delta = " << delta << ": need |delta| < 1/2 (nu = n0 + delta)";
    throw std::invalid_argument(os.str());
  }
  if (delta == 0.0) {
    throw std::invalid_argument("invalid harmonic offset delta = 0: the E[s2] series needs nu non-integer");
  }
  if (n0 < 1 || n0 > 150) throw std::invalid_argument("harmonic number n0 must lie in [1, 150]");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be finite and >= 0");
  if (!(i_min > 0.0)) throw std::invalid_argument("i_min must be positive");
  if (!(i_lo >= i_min) || !(i_hi > i_lo)) {
    throw std::invalid_argument("action domain needs i_min <= i_lo < i_hi");
  }
  if (series_margin < 1) throw std::invalid_argument("series_margin must be >= 1");
}

void KarneyConfig::check_action(double i) const {
  if (!(i >= i_min)) {
    std::ostringstream os;
    os << "action I = " << i << " below I_min = " << i_min;
    throw std::domain_error(os.str());
  }
}

ScalarField action_hamiltonian() {
  return ScalarField(
      2, [](const Vector& z) { return z[1]; }, [](const Vector&) { return Vector(Vector::Unit(2, 1)); },
      Provenance::analytic, [](const Vector&) { return Matrix(Matrix::Zero(2, 2)); });
}

double karney_kick_phase(double delta, double eta) { return pi - pi * delta - eta; }

double karney_wave_phase(std::uint64_t seed, std::uint64_t r) {
  return 2.0 * pi * rng::CounterRng(seed, rng::Stream::wave_phase, r, 0).uniform();
}

namespace {

/// F(I) = J_n(sqrt(2I)) and its first two I-derivatives, memoized per thread
/// on the last (n, I).
struct ActionBessel {
  double f, f1, f2;
};

ActionBessel action_bessel(int n, double action) {
  thread_local int last_n = -1;
  thread_local double last_i = std::numeric_limits<double>::quiet_NaN();
  thread_local ActionBessel last{};
  if (n == last_n && action == last_i) return last;
  const double rho = std::sqrt(2.0 * action);
  const std::vector<double> j = bessel_j_sequence(n + 1, rho);
  const double jn = j[static_cast<std::size_t>(n)];
  const double jp = n == 0 ? -j[1] : 0.5 * (j[static_cast<std::size_t>(n) - 1] - j[static_cast<std::size_t>(n) + 1]);
  const double jpp = -jp / rho - (1.0 - static_cast<double>(n) * n / (rho * rho)) * jn;
  last = {jn, jp / rho, jpp / (rho * rho) - jp / (rho * rho * rho)};
  last_n = n;
  last_i = action;
  return last;
}

}  // namespace

PerturbationProcess karney_perturbation(const KarneyConfig& cfg, std::uint64_t seed,
                                        bool single_harmonic) {
  cfg.validate();
  const double nu = cfg.nu();
  auto sampler = [cfg, nu, single_harmonic](std::uint64_t s, std::uint64_t r) {
    const double eta = karney_wave_phase(s, r);
    PerturbationRealization out;
    if (single_harmonic) {
      const int n = cfg.n0;
      out.value = [cfg, n, nu, eta](double t, const Vector& z) {
        cfg.check_action(z[1]);
        return -action_bessel(n, z[1]).f * std::sin(n * z[0] - nu * t - eta);
      };
      out.gradient = [cfg, n, nu, eta](double t, const Vector& z) {
        cfg.check_action(z[1]);
        const ActionBessel b = action_bessel(n, z[1]);
        const double ph = n * z[0] - nu * t - eta;
        return Vector(Eigen::Vector2d(-b.f * n * std::cos(ph), -b.f1 * std::sin(ph)));
      };
    } else {
      out.value = [cfg, nu, eta](double t, const Vector& z) {
        cfg.check_action(z[1]);
        return -std::sin(std::sqrt(2.0 * z[1]) * std::sin(z[0]) - nu * t - eta);
      };
      out.gradient = [cfg, nu, eta](double t, const Vector& z) {
        cfg.check_action(z[1]);
        const double rho = std::sqrt(2.0 * z[1]);
        const double c = std::cos(rho * std::sin(z[0]) - nu * t - eta);
        return Vector(Eigen::Vector2d(-c * rho * std::cos(z[0]), -c * std::sin(z[0]) / rho));
      };
    }
    return out;
  };
  return PerturbationProcess(2, KarneyConfig::tau, cfg.epsilon, 0.0, seed, sampler);
}

KarneySeries karney_s2_series(const KarneyConfig& cfg, double action) {
  cfg.validate();
  cfg.check_action(action);
  const double rho = std::sqrt(2.0 * action);
  const int m_max = std::max(cfg.n0, static_cast<int>(std::ceil(rho))) + cfg.series_margin;
  const std::vector<double> j = bessel_j_sequence(m_max + 2, rho);
  auto jval = [&](int k) { return j[static_cast<std::size_t>(std::abs(k))]; };
  auto jder = [&](int k) {
    k = std::abs(k);
    return k == 0 ? -j[1] : 0.5 * (j[static_cast<std::size_t>(k) - 1] - j[static_cast<std::size_t>(k) + 1]);
  };
  auto jsec = [&](int k) {
    const double kk = static_cast<double>(k) * k;
    return -jder(k) / rho - (1.0 - kk / (rho * rho)) * jval(k);
  };
  const double nu = cfg.nu();
  const double c1 = pi / 4.0;
  const double c2 = std::sin(2.0 * pi * cfg.delta) / 8.0;
  double v = 0.0;
  double d_rho = 0.0;
  double d2_rho = 0.0;
  for (int m = -m_max; m <= m_max; ++m) {
    const double w = c1 / (m - nu) + c2 / ((nu - m) * (nu - m));
    const int a = m + 1;
    const int b = m - 1;
    const double ja = jval(a), jb = jval(b), pa = jder(a), pb = jder(b);
    v += w * (ja * ja - jb * jb);
    d_rho += w * 2.0 * (ja * pa - jb * pb);
    d2_rho += w * 2.0 * ((pa * pa + ja * jsec(a)) - (pb * pb + jb * jsec(b)));
  }
  KarneySeries out;
  out.value = v;
  out.d_action = d_rho / rho;
  out.d2_action = d2_rho / (rho * rho) - d_rho / (rho * rho * rho);
  out.terms = m_max;
  const double jm = jval(m_max), jm1 = jval(m_max + 1), jm2 = jval(m_max + 2);
  out.tail_bound = 2.0 * (c1 + std::abs(c2)) * (jm * jm + jm1 * jm1 + jm2 * jm2);
  return out;
}

namespace {

KarneySeries cached_series(const KarneyConfig& cfg, double action) {
  thread_local double last_i = std::numeric_limits<double>::quiet_NaN();
  thread_local int last_n = -1, last_margin = -1;
  thread_local double last_delta = std::numeric_limits<double>::quiet_NaN();
  thread_local KarneySeries last{};
  if (action == last_i && cfg.n0 == last_n && cfg.delta == last_delta && cfg.series_margin == last_margin) {
    return last;
  }
  last = karney_s2_series(cfg, action);
  last_i = action;
  last_n = cfg.n0;
  last_delta = cfg.delta;
  last_margin = cfg.series_margin;
  return last;
}

}  // namespace

ScalarField karney_s2_field(const KarneyConfig& cfg) {
  cfg.validate();
  return ScalarField(
      2, [cfg](const Vector& z) { return cached_series(cfg, z[1]).value; },
      [cfg](const Vector& z) { return Vector(Eigen::Vector2d(0.0, cached_series(cfg, z[1]).d_action)); },
      Provenance::analytic,
      [cfg](const Vector& z) {
        Matrix h = Matrix::Zero(2, 2);
        h(1, 1) = cached_series(cfg, z[1]).d2_action;
        return h;
      });
}

std::vector<ScalarField> example2_basis_hamiltonians(const KarneyConfig& cfg) {
  cfg.validate();
  const double amp = std::sqrt(2.0) * pi * sinc(pi * cfg.delta);
  const int n = cfg.n0;
  std::vector<ScalarField> out;
  // k = 0: cos(n theta); k = 1: sin(n theta)
  for (int k = 0; k < 2; ++k) {
    auto trig = [k, n](double th) { return k == 0 ? std::cos(n * th) : std::sin(n * th); };
    auto dtrig = [k, n](double th) { return k == 0 ? -n * std::sin(n * th) : n * std::cos(n * th); };
    out.emplace_back(
        2,
        [cfg, amp, n, trig](const Vector& z) {
          cfg.check_action(z[1]);
          return amp * action_bessel(n, z[1]).f * trig(z[0]);
        },
        [cfg, amp, n, trig, dtrig](const Vector& z) {
          cfg.check_action(z[1]);
          const ActionBessel b = action_bessel(n, z[1]);
          return Vector(Eigen::Vector2d(amp * b.f * dtrig(z[0]), amp * b.f1 * trig(z[0])));
        },
        Provenance::analytic,
        [cfg, amp, n, trig, dtrig](const Vector& z) {
          cfg.check_action(z[1]);
          const ActionBessel b = action_bessel(n, z[1]);
          Matrix h(2, 2);
          h(0, 0) = -amp * b.f * n * n * trig(z[0]);
          h(0, 1) = h(1, 0) = amp * b.f1 * dtrig(z[0]);
          h(1, 1) = amp * b.f2 * trig(z[0]);
          return h;
        });
  }
  return out;
}

LangevinModel example2_model(const KarneyConfig& cfg) {
  cfg.validate();
  return LangevinModel::from_kicks(action_hamiltonian(), karney_s2_field(cfg),
                                   example2_basis_hamiltonians(cfg), cfg.epsilon, KarneyConfig::tau,
                                   "example2");
}

double karney_chaos_threshold(const KarneyConfig& cfg) { return std::cbrt(cfg.nu()) / 4.0; }

double example2_diffusion_ii(const KarneyConfig& cfg, double action) {
  cfg.validate();
  cfg.check_action(action);
  const double s = sinc(pi * cfg.delta);
  const double f = action_bessel(cfg.n0, action).f;
  return 0.5 * cfg.epsilon * cfg.epsilon * pi * s * s * cfg.n0 * cfg.n0 * f * f;
}

std::vector<Vector> example2_micro_run(const KarneyConfig& cfg, const Vector& z0, int period_count,
                                       std::uint64_t seed, std::uint64_t sample,
                                       int steps_per_period) {
  cfg.validate();
  if (period_count < 0) throw std::invalid_argument("example2_micro_run: period_count must be >= 0");
  if (steps_per_period < 1) throw std::invalid_argument("example2_micro_run: steps_per_period must be >= 1");
  if (z0.size() != 2) throw std::invalid_argument("example2_micro_run: state must be (theta, I)");
  const double eps = cfg.epsilon;
  const double nu = cfg.nu();
  const double h = KarneyConfig::tau / steps_per_period;
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(period_count) + 1);
  out.push_back(z0);
  double th = z0[0];
  double act = z0[1];
  for (int k = 0; k < period_count; ++k) {
    const double eta =
        2.0 * pi *
        rng::CounterRng(seed, rng::Stream::wave_phase, sample, static_cast<std::uint64_t>(k) + 1).uniform();
    auto rhs = [&](double t, double a, double b, double& da, double& db) {
      if (!(b > 0.0)) {
        std::ostringstream os;
        os << "example2_micro_run: I <= 0 in period " << k;
        throw IntegrationFailure(os.str(), k * KarneyConfig::tau + t);
      }
      const double rho = std::sqrt(2.0 * b);
      const double s = std::sin(a);
      const double c = std::cos(rho * s - nu * t - eta);
      da = 1.0 - eps * c * s / rho;
      db = eps * c * rho * std::cos(a);
    };
    for (int s = 0; s < steps_per_period; ++s) {
      const double t = s * h;
      double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
      rhs(t, th, act, k1a, k1b);
      rhs(t + 0.5 * h, th + 0.5 * h * k1a, act + 0.5 * h * k1b, k2a, k2b);
      rhs(t + 0.5 * h, th + 0.5 * h * k2a, act + 0.5 * h * k2b, k3a, k3b);
      rhs(t + h, th + h * k3a, act + h * k3b, k4a, k4b);
      th += (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
      act += (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    }
    if (!(act > 0.0) || !std::isfinite(th)) {
      std::ostringstream os;
      os << "example2_micro_run: I <= 0 at the end of period " << k;
      throw IntegrationFailure(os.str(), (k + 1) * KarneyConfig::tau);
    }
    out.push_back(Eigen::Vector2d(th, act));
  }
  return out;
}

// ---------------------------------------------------------------------------

LangevinModel hyperbolic_test_model(double lambda, double sigma) {
  auto qp = [](double c) {
    return ScalarField(
        2, [c](const Vector& z) { return c * z[0] * z[1]; },
        [c](const Vector& z) { return Vector(Eigen::Vector2d(c * z[1], c * z[0])); },
        Provenance::analytic, [c](const Vector&) {
          Matrix h(2, 2);
          h << 0.0, c, c, 0.0;
          return h;
        });
  };
  return LangevinModel::hamiltonian(qp(lambda), {qp(sigma)}, "hyperbolic");
}

}  // namespace stochacc
