#include "stochacc/sde.hpp"

#include <cmath>
#include <sstream>

namespace stochacc {

LangevinModel::LangevinModel(VectorField drift, std::vector<VectorField> noise, std::string name)
    : drift_(std::move(drift)), noise_(std::move(noise)), name_(std::move(name)) {
  if (drift_.dim() == 0 || drift_.dim() % 2 != 0) {
    throw std::invalid_argument("langevin model needs even, nonzero dimension");
  }
  for (const VectorField& b : noise_) {
    if (b.dim() != drift_.dim()) throw std::invalid_argument("noise field dimension differs from drift");
  }
}

LangevinModel LangevinModel::hamiltonian(const ScalarField& drift_hamiltonian,
                                         const std::vector<ScalarField>& noise_hamiltonians,
                                         std::string name) {
  std::vector<VectorField> noise;
  noise.reserve(noise_hamiltonians.size());
  for (const ScalarField& h : noise_hamiltonians) noise.push_back(VectorField::hamiltonian(h));
  return LangevinModel(VectorField::hamiltonian(drift_hamiltonian), std::move(noise), std::move(name));
}

LangevinModel LangevinModel::from_kicks(const ScalarField& background, const ScalarField& s2_mean,
                                        const std::vector<ScalarField>& modes, double epsilon,
                                        double interval, std::string name) {
  if (!(interval > 0.0)) throw std::invalid_argument("from_kicks: interval must be positive");
  const ScalarField drift = background + (epsilon * epsilon / interval) * s2_mean;
  std::vector<ScalarField> noise;
  for (const ScalarField& m : modes) noise.push_back((epsilon / std::sqrt(interval)) * m);
  return hamiltonian(drift, noise, std::move(name));
}

bool LangevinModel::is_hamiltonian() const {
  if (!drift_.is_hamiltonian()) return false;
  for (const VectorField& b : noise_) {
    if (!b.is_hamiltonian()) return false;
  }
  return true;
}

Matrix LangevinModel::noise_at(const Vector& z) const {
  Matrix out(z.size(), static_cast<Eigen::Index>(noise_.size()));
  for (std::size_t k = 0; k < noise_.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = noise_[k](z);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_step_inputs(const LangevinModel& model, const Vector& z, double h, const Vector& dw) {
  if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
  if (static_cast<std::size_t>(dw.size()) != model.channels()) {
    throw std::invalid_argument("increment count differs from channel count");
  }
  if (static_cast<std::size_t>(z.size()) != model.dim()) {
    throw std::invalid_argument("state dimension differs from model dimension");
  }
}

Vector increment(const LangevinModel& model, const Vector& z, double h, const Vector& dw) {
  Vector out = h * model.drift_at(z);
  if (model.channels() > 0) out.noalias() += model.noise_at(z) * dw;
  return out;
}

void check_finite(const Vector& out, const Vector& z, double h, const Vector& dw, const char* where) {
  if (!out.allFinite()) throw StepFailure(std::string(where) + ": non-finite state", z, h, dw);
}

}  // namespace

Vector euler_heun_step(const LangevinModel& model, const Vector& z, double h, const Vector& dw) {
  check_step_inputs(model, z, h, dw);
  const Vector k1 = increment(model, z, h, dw);
  const Vector pred = z + k1;
  check_finite(pred, z, h, dw, "euler_heun_step");
  const Vector k2 = increment(model, pred, h, dw);
  Vector out = z + 0.5 * (k1 + k2);
  check_finite(out, z, h, dw, "euler_heun_step");
  return out;
}

Vector midpoint_step(const LangevinModel& model, const Vector& z, double h, const Vector& dw,
                     double tol, int max_iter, int* iterations) {
  check_step_inputs(model, z, h, dw);
  if (!(tol > 0.0) || max_iter < 1) throw std::invalid_argument("midpoint_step: need tol > 0, max_iter >= 1");
  const double scale = std::max(1.0, z.lpNorm<Eigen::Infinity>());
  // Start from the explicit Euler guess.
  Vector next = z + increment(model, z, h, dw);
  check_finite(next, z, h, dw, "midpoint_step");
  for (int it = 1; it <= max_iter; ++it) {
    const Vector mid = 0.5 * (z + next);
    Vector candidate = z + increment(model, mid, h, dw);
    check_finite(candidate, z, h, dw, "midpoint_step");
    const double change = (candidate - next).lpNorm<Eigen::Infinity>();
    next = std::move(candidate);
    if (change <= tol * scale) {
      // polish
      next = z + increment(model, 0.5 * (z + next), h, dw);
      check_finite(next, z, h, dw, "midpoint_step");
      if (iterations) *iterations = it;
      return next;
    }
  }
  std::ostringstream os;
  os << "midpoint_step: fixed-point iteration did not converge in " << max_iter
     << " iterations (h = " << h << ")";
  throw StepFailure(os.str(), z, h, dw);
}

Vector euler_maruyama_step(const LangevinModel& model, const Vector& z, double h, const Vector& dw) {
  check_step_inputs(model, z, h, dw);
  Vector out = z + increment(model, z, h, dw);
  check_finite(out, z, h, dw, "euler_maruyama_step");
  return out;
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::euler_heun: return "euler-heun";
    case Scheme::midpoint: return "midpoint";
    case Scheme::euler_maruyama: return "euler-maruyama";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "euler-heun" || s == "heun") return Scheme::euler_heun;
  if (s == "midpoint") return Scheme::midpoint;
  if (s == "euler-maruyama") return Scheme::euler_maruyama;
  throw std::invalid_argument("unknown scheme '" + s + "' (euler-heun | midpoint | euler-maruyama)");
}

std::int64_t step_count(double T, double h) {
  if (!(h > 0.0) || !(T >= 0.0)) throw std::invalid_argument("integrate: need h > 0 and T >= 0");
  const double n = std::round(T / h);
  if (std::abs(n * h - T) > 1e-9 * std::max(1.0, T)) {
    std::ostringstream os;
    os << "integrate: T = " << T << " is not an integer multiple of h = " << h;
    throw std::invalid_argument(os.str());
  }
  return static_cast<std::int64_t>(n);
}

namespace {

Vector advance(const LangevinModel& model, const Vector& z, double h, const Vector& dw,
               const IntegrateOptions& opt) {
  switch (opt.scheme) {
    case Scheme::euler_heun: return euler_heun_step(model, z, h, dw);
    case Scheme::midpoint: return midpoint_step(model, z, h, dw, opt.tol, opt.max_iter);
    case Scheme::euler_maruyama: return euler_maruyama_step(model, z, h, dw);
  }
  throw std::logic_error("unreachable scheme");
}

PathState record(const LangevinModel& model, const Vector& z, double t, std::int64_t step,
                 const IntegrateOptions& opt) {
  PathState s;
  s.z = z;
  s.t = t;
  s.step = step;
  if (opt.record_energy && model.drift_hamiltonian()) s.drift_energy = model.drift_hamiltonian()->value(z);
  return s;
}

[[noreturn]] void rethrow_at(const std::exception& e, const Vector& z, double h, const Vector& dw,
                             std::int64_t step) {
  std::ostringstream os;
  os << e.what() << " (step " << step << ")";
  throw StepFailure(os.str(), z, h, dw, step);
}

}  // namespace

std::vector<PathState> integrate(const LangevinModel& model, const Vector& z0, double T, double h,
                                 const WienerDriver& driver, std::uint64_t path_id,
                                 const IntegrateOptions& options) {
  if (driver.channels() != model.channels()) {
    throw std::invalid_argument("integrate: driver channel count differs from model");
  }
  if (options.record_every < 1) throw std::invalid_argument("integrate: record_every must be >= 1");
  const std::int64_t n = step_count(T, h);
  std::vector<PathState> out;
  out.reserve(static_cast<std::size_t>(n / options.record_every + 2));
  Vector z = z0;
  out.push_back(record(model, z, 0.0, 0, options));
  for (std::int64_t s = 0; s < n; ++s) {
    const Vector dw = driver.increments(path_id, static_cast<std::uint64_t>(s), h);
    try {
      z = advance(model, z, h, dw, options);
    } catch (const std::exception& e) {
      rethrow_at(e, z, h, dw, s);
    }
    const std::int64_t done = s + 1;
    if (done % options.record_every == 0 || done == n) {
      out.push_back(record(model, z, static_cast<double>(done) * h, done, options));
    }
  }
  return out;
}

std::pair<std::vector<PathState>, std::vector<PathState>> integrate_pair(
    const LangevinModel& model, const Vector& za0, const Vector& zb0, double T, double h,
    const WienerDriver& driver, std::uint64_t pair_id, const IntegrateOptions& options) {
  return {integrate(model, za0, T, h, driver, pair_id, options),
          integrate(model, zb0, T, h, driver, pair_id, options)};
}

}  // namespace stochacc
