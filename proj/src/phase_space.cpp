#include "stochacc/phase_space.hpp"

#include <cmath>
#include <sstream>

namespace stochacc {

namespace {

void check_even_finite(const Vector& v) {
  if (v.size() == 0 || v.size() % 2 != 0) {
    throw std::invalid_argument("phase point must have even, nonzero length (got " +
                                std::to_string(v.size()) + ")");
  }
  if (!v.allFinite()) throw std::invalid_argument("phase point has non-finite entries");
}

void check_dim(std::size_t expected, const Vector& z, const char* where) {
  if (static_cast<std::size_t>(z.size()) != expected) {
    std::ostringstream os;
    os << where << ": dimension mismatch (field " << expected << ", point " << z.size() << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

PhasePoint::PhasePoint(Vector coords) : coords_(std::move(coords)) { check_even_finite(coords_); }

PhasePoint::PhasePoint(std::initializer_list<double> coords)
    : coords_(static_cast<Eigen::Index>(coords.size())) {
  Eigen::Index i = 0;
  for (double c : coords) coords_[i++] = c;
  check_even_finite(coords_);
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::sample_combination: return "sample-combination";
    case Provenance::interpolated: return "interpolated";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(std::size_t dim, ValueFn value, GradientFn gradient, Provenance provenance,
                         HessianFn hessian)
    : dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)),
      provenance_(provenance) {
  if (!value_ || !gradient_) throw std::invalid_argument("scalar field needs value and gradient");
}

ScalarField ScalarField::zero(std::size_t dim) { return constant(dim, 0.0); }

ScalarField ScalarField::constant(std::size_t dim, double c) {
  const auto n = static_cast<Eigen::Index>(dim);
  return ScalarField(
      dim, [c](const Vector&) { return c; }, [n](const Vector&) { return Vector::Zero(n); },
      Provenance::analytic, [n](const Vector&) { return Matrix::Zero(n, n); });
}

double ScalarField::value(const Vector& z) const { return value_(z); }

Vector ScalarField::gradient(const Vector& z) const { return gradient_(z); }

Matrix ScalarField::hessian(const Vector& z) const {
  if (hessian_) return hessian_(z);
  Matrix h = fd::jacobian(gradient_, z);
  return 0.5 * (h + h.transpose());
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  if (a.dim_ != b.dim_) throw std::invalid_argument("adding scalar fields of different dimension");
  ScalarField::HessianFn hess;
  if (a.hessian_ && b.hessian_) {
    hess = [ha = a.hessian_, hb = b.hessian_](const Vector& z) { return Matrix(ha(z) + hb(z)); };
  }
  const Provenance prov =
      a.provenance_ == b.provenance_ ? a.provenance_ : Provenance::sample_combination;
  return ScalarField(
      a.dim_, [va = a.value_, vb = b.value_](const Vector& z) { return va(z) + vb(z); },
      [ga = a.gradient_, gb = b.gradient_](const Vector& z) { return Vector(ga(z) + gb(z)); },
      prov, std::move(hess));
}

ScalarField operator*(double c, const ScalarField& f) {
  ScalarField::HessianFn hess;
  if (f.hessian_) hess = [c, h = f.hessian_](const Vector& z) { return Matrix(c * h(z)); };
  return ScalarField(
      f.dim_, [c, v = f.value_](const Vector& z) { return c * v(z); },
      [c, g = f.gradient_](const Vector& z) { return Vector(c * g(z)); }, f.provenance_,
      std::move(hess));
}

// ---------------------------------------------------------------------------

VectorField::VectorField(std::size_t dim, EvalFn eval, JacobianFn jacobian,
                         std::optional<ScalarField> generator)
    : dim_(dim),
      eval_(std::move(eval)),
      jacobian_(std::move(jacobian)),
      generator_(std::move(generator)) {}

VectorField VectorField::hamiltonian(const ScalarField& generator) {
  if (generator.dim() % 2 != 0) throw std::invalid_argument("hamiltonian field needs even dimension");
  EvalFn eval = [g = generator](const Vector& z) { return apply_symplectic(g.gradient(z)); };
  JacobianFn jac;
  if (generator.has_analytic_hessian()) {
    jac = [g = generator](const Vector& z) {
      const Matrix h = g.hessian(z);
      const Eigen::Index n = h.rows() / 2;
      Matrix out(h.rows(), h.cols());
      out.topRows(n) = h.bottomRows(n);
      out.bottomRows(n) = -h.topRows(n);
      return out;
    };
  }
  return VectorField(generator.dim(), std::move(eval), std::move(jac), generator);
}

VectorField VectorField::raw(std::size_t dim, EvalFn eval, JacobianFn jacobian) {
  return VectorField(dim, std::move(eval), std::move(jacobian), std::nullopt);
}

Matrix VectorField::jacobian(const Vector& z) const {
  if (jacobian_) return jacobian_(z);
  return fd::jacobian(eval_, z);
}

// ---------------------------------------------------------------------------

namespace fd {

double step(double x) { return 1e-5 * std::max(1.0, std::abs(x)); }

Vector gradient(const std::function<double(const Vector&)>& f, const Vector& z) {
  Vector g(z.size());
  Vector zp = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = step(z[i]);
    zp[i] = z[i] + h;
    const double fp = f(zp);
    zp[i] = z[i] - h;
    const double fm = f(zp);
    zp[i] = z[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix jacobian(const std::function<Vector(const Vector&)>& f, const Vector& z) {
  Matrix jac;
  Vector zp = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = step(z[i]);
    zp[i] = z[i] + h;
    const Vector fp = f(zp);
    zp[i] = z[i] - h;
    const Vector fm = f(zp);
    zp[i] = z[i];
    if (jac.size() == 0) jac.resize(fp.size(), z.size());
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

}  // namespace fd

Matrix symplectic_matrix(std::size_t dim) {
  if (dim % 2 != 0) throw std::invalid_argument("symplectic matrix needs even dimension");
  const auto n = static_cast<Eigen::Index>(dim / 2);
  Matrix j = Matrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = Matrix::Identity(n, n);
  j.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  return j;
}

Vector apply_symplectic(const Vector& g) {
  const Eigen::Index n = g.size() / 2;
  Vector out(g.size());
  out.head(n) = g.tail(n);
  out.tail(n) = -g.head(n);
  return out;
}

VectorField hamiltonian_vector_field(const ScalarField& h) { return VectorField::hamiltonian(h); }

double poisson_bracket(const ScalarField& f, const ScalarField& g, const Vector& z) {
  if (f.dim() != g.dim()) throw std::invalid_argument("poisson_bracket: field dimensions differ");
  check_dim(f.dim(), z, "poisson_bracket");
  return f.gradient(z).dot(apply_symplectic(g.gradient(z)));
}

PhasePoint flow(const VectorField& field, const PhasePoint& z0, double t, int step_count) {
  if (step_count < 1) throw std::invalid_argument("flow: step_count must be >= 1");
  check_dim(field.dim(), z0.coords(), "flow");
  if (t == 0.0) return z0;
  const double h = t / step_count;
  Vector z = z0.coords();
  for (int s = 0; s < step_count; ++s) {
    const Vector k1 = field(z);
    const Vector k2 = field(z + 0.5 * h * k1);
    const Vector k3 = field(z + 0.5 * h * k2);
    const Vector k4 = field(z + h * k3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite()) {
      throw IntegrationFailure("flow: non-finite state", (s + 1) * h);
    }
  }
  return PhasePoint(std::move(z));
}

FlowWithTangent flow_with_tangent(const VectorField& field, const Vector& z0, double t,
                                  int step_count) {
  if (step_count < 1) throw std::invalid_argument("flow_with_tangent: step_count must be >= 1");
  check_dim(field.dim(), z0, "flow_with_tangent");
  FlowWithTangent out{z0, Matrix::Identity(z0.size(), z0.size())};
  if (t == 0.0) return out;
  const double h = t / step_count;
  Vector& z = out.point;
  Matrix& m = out.tangent;
  for (int s = 0; s < step_count; ++s) {
    const Matrix j1 = field.jacobian(z);
    const Vector k1 = field(z);
    const Matrix d1 = j1 * m;
    const Vector y2 = z + 0.5 * h * k1;
    const Vector k2 = field(y2);
    const Matrix d2 = field.jacobian(y2) * (m + 0.5 * h * d1);
    const Vector y3 = z + 0.5 * h * k2;
    const Vector k3 = field(y3);
    const Matrix d3 = field.jacobian(y3) * (m + 0.5 * h * d2);
    const Vector y4 = z + h * k3;
    const Vector k4 = field(y4);
    const Matrix d4 = field.jacobian(y4) * (m + h * d3);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    m += (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    if (!z.allFinite() || !m.allFinite()) {
      throw IntegrationFailure("flow_with_tangent: non-finite state", (s + 1) * h);
    }
  }
  return out;
}

double pullback_eval(const VectorField& field, double lambda, const ScalarField& h,
                     const PhasePoint& z, int step_count) {
  return h.value(flow(field, z, -lambda, step_count));
}

}  // namespace stochacc
