#include "stochacc/kick_operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stochacc {

PerturbationProcess::PerturbationProcess(std::size_t dim, double interval, double amplitude,
                                         double correlation_time, std::uint64_t seed,
                                         Sampler sampler)
    : dim_(dim),
      interval_(interval),
      amplitude_(amplitude),
      correlation_time_(correlation_time),
      seed_(seed),
      sampler_(std::move(sampler)) {
  if (!(interval_ > 0.0)) throw std::invalid_argument("perturbation interval must be positive");
  if (!sampler_) throw std::invalid_argument("perturbation process needs a sampler");
}

PerturbationProcess PerturbationProcess::zero(std::size_t dim, double interval) {
  const auto n = static_cast<Eigen::Index>(dim);
  return PerturbationProcess(dim, interval, 0.0, 0.0, 0, [n](std::uint64_t, std::uint64_t) {
    return PerturbationRealization{[](double, const Vector&) { return 0.0; },
                                   [n](double, const Vector&) { return Vector(Vector::Zero(n)); }};
  });
}

PerturbationProcess PerturbationProcess::with_seed(std::uint64_t seed) const {
  PerturbationProcess out = *this;
  out.seed_ = seed;
  return out;
}

PerturbationProcess PerturbationProcess::scaled(double c) const {
  PerturbationProcess out = *this;
  out.sampler_ = [c, s = sampler_](std::uint64_t seed, std::uint64_t index) {
    PerturbationRealization r = s(seed, index);
    return PerturbationRealization{
        [c, v = r.value](double t, const Vector& z) { return c * v(t, z); },
        [c, g = r.gradient](double t, const Vector& z) { return Vector(c * g(t, z)); }};
  };
  return out;
}

PerturbationProcess operator+(const PerturbationProcess& a, const PerturbationProcess& b) {
  if (a.dim_ != b.dim_ || a.interval_ != b.interval_) {
    throw std::invalid_argument("summed perturbations must share dimension and interval");
  }
  PerturbationProcess out = a;
  out.sampler_ = [sa = a.sampler_, sb = b.sampler_, seed_b = b.seed_](std::uint64_t seed,
                                                                       std::uint64_t index) {
    PerturbationRealization ra = sa(seed, index);
    PerturbationRealization rb = sb(seed_b, index);
    return PerturbationRealization{
        [va = ra.value, vb = rb.value](double t, const Vector& z) { return va(t, z) + vb(t, z); },
        [ga = ra.gradient, gb = rb.gradient](double t, const Vector& z) {
          return Vector(ga(t, z) + gb(t, z));
        }};
  };
  out.correlation_time_ = std::max(a.correlation_time_, b.correlation_time_);
  return out;
}

// ---------------------------------------------------------------------------

KickQuadrature::KickQuadrature(const ScalarField& background, double interval, int nodes,
                               double flow_max_step)
    : background_(VectorField::hamiltonian(background)),
      interval_(interval),
      flow_max_step_(flow_max_step),
      rule_(gauss_legendre(nodes, 0.0, interval)) {
  if (nodes < 2) throw std::invalid_argument("kick quadrature needs at least 2 nodes");
  if (!(interval > 0.0)) throw std::invalid_argument("kick quadrature interval must be positive");
  if (!(flow_max_step > 0.0)) throw std::invalid_argument("flow_max_step must be positive");
}

PullbackSnapshot KickQuadrature::pullback(const Vector& z, std::span<const double> lambdas) const {
  PullbackSnapshot snap;
  snap.points.reserve(lambdas.size());
  snap.tangents.reserve(lambdas.size());
  Vector point = z;
  Matrix tangent = Matrix::Identity(z.size(), z.size());
  double at = 0.0;
  for (double lambda : lambdas) {
    const double gap = lambda - at;
    if (gap < 0.0) throw std::invalid_argument("pullback lambdas must be ascending and >= 0");
    if (gap > 0.0) {
      const int steps = std::max(1, static_cast<int>(std::ceil(gap / flow_max_step_)));
      FlowWithTangent f = flow_with_tangent(background_, point, -gap, steps);
      point = std::move(f.point);
      tangent = f.tangent * tangent;
      at = lambda;
    }
    snap.points.push_back(point);
    snap.tangents.push_back(tangent);
  }
  return snap;
}

// ---------------------------------------------------------------------------

KickEnsemble::KickEnsemble(std::shared_ptr<const KickQuadrature> quadrature,
                           std::vector<PerturbationRealization> members,
                           std::vector<std::uint64_t> realization_indices)
    : quadrature_(std::move(quadrature)),
      members_ptr_(std::make_shared<const std::vector<PerturbationRealization>>(std::move(members))),
      indices_(std::move(realization_indices)) {
  if (!quadrature_) throw std::invalid_argument("kick ensemble needs a quadrature");
  if (indices_.empty()) {
    indices_.resize(members_ptr_->size());
    for (std::size_t j = 0; j < indices_.size(); ++j) indices_[j] = j;
  }
  if (indices_.size() != members_ptr_->size()) {
    throw std::invalid_argument("kick ensemble: index count differs from member count");
  }
}

Vector KickEnsemble::values(const Vector& z) const {
  const KickQuadrature& q = *quadrature_;
  const PullbackSnapshot snap = q.pullback(z);
  const double tau = q.interval();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(members().size()));
  for (std::size_t i = 0; i < snap.points.size(); ++i) {
    const double t = tau - q.rule().nodes[i];
    const double w = q.rule().weights[i];
    for (std::size_t j = 0; j < members().size(); ++j) {
      out[static_cast<Eigen::Index>(j)] += w * members()[j].value(t, snap.points[i]);
    }
  }
  return out;
}

Matrix KickEnsemble::gradients(const Vector& z) const {
  const KickQuadrature& q = *quadrature_;
  const PullbackSnapshot snap = q.pullback(z);
  const double tau = q.interval();
  const auto k = static_cast<Eigen::Index>(members().size());
  Matrix raw = Matrix::Zero(z.size(), k);
  Matrix out = Matrix::Zero(z.size(), k);
  for (std::size_t i = 0; i < snap.points.size(); ++i) {
    const double t = tau - q.rule().nodes[i];
    const double w = q.rule().weights[i];
    for (Eigen::Index j = 0; j < k; ++j) {
      raw.col(j) = members()[static_cast<std::size_t>(j)].gradient(t, snap.points[i]);
    }
    out.noalias() += w * snap.tangents[i].transpose() * raw;
  }
  return out;
}

ScalarField KickEnsemble::member(std::size_t j) const {
  if (j >= members().size()) throw std::out_of_range("kick ensemble member index");
  Vector c = Vector::Zero(static_cast<Eigen::Index>(members().size()));
  c[static_cast<Eigen::Index>(j)] = 1.0;
  return combination(c);
}

ScalarField KickEnsemble::combination(const Vector& coefficients) const {
  if (static_cast<std::size_t>(coefficients.size()) != members().size()) {
    throw std::invalid_argument("kick combination: coefficient count differs from member count");
  }
  // Keep only the members that contribute.
  std::vector<std::size_t> used;
  for (std::size_t j = 0; j < members().size(); ++j) {
    if (coefficients[static_cast<Eigen::Index>(j)] != 0.0) used.push_back(j);
  }
  auto quad = quadrature_;
  auto members = members_ptr_;
  auto value = [quad, members, used, coefficients](const Vector& z) {
    const PullbackSnapshot snap = quad->pullback(z);
    const double tau = quad->interval();
    double acc = 0.0;
    for (std::size_t i = 0; i < snap.points.size(); ++i) {
      const double t = tau - quad->rule().nodes[i];
      double inner = 0.0;
      for (std::size_t j : used) {
        inner += coefficients[static_cast<Eigen::Index>(j)] * (*members)[j].value(t, snap.points[i]);
      }
      acc += quad->rule().weights[i] * inner;
    }
    return acc;
  };
  auto gradient = [quad, members, used, coefficients](const Vector& z) {
    const PullbackSnapshot snap = quad->pullback(z);
    const double tau = quad->interval();
    Vector acc = Vector::Zero(z.size());
    for (std::size_t i = 0; i < snap.points.size(); ++i) {
      const double t = tau - quad->rule().nodes[i];
      Vector inner = Vector::Zero(z.size());
      for (std::size_t j : used) {
        inner += coefficients[static_cast<Eigen::Index>(j)] * (*members)[j].gradient(t, snap.points[i]);
      }
      acc.noalias() += quad->rule().weights[i] * (snap.tangents[i].transpose() * inner);
    }
    return acc;
  };
  return ScalarField(dim(), std::move(value), std::move(gradient), Provenance::sample_combination);
}

KickEnsemble make_kick_ensemble(const PerturbationProcess& process, const ScalarField& background,
                                std::uint64_t first, std::size_t count, int nodes,
                                double flow_max_step) {
  if (process.dim() != background.dim()) {
    throw std::invalid_argument("make_kick_ensemble: perturbation and background dimensions differ");
  }
  auto quad = std::make_shared<const KickQuadrature>(background, process.interval(), nodes,
                                                     flow_max_step);
  std::vector<PerturbationRealization> members;
  std::vector<std::uint64_t> indices;
  members.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    members.push_back(process.realization(first + j));
    indices.push_back(first + j);
  }
  return KickEnsemble(quad, std::move(members), std::move(indices));
}

ScalarField compute_s1(const PerturbationProcess& process, const ScalarField& background,
                       std::uint64_t realization, int nodes, double flow_max_step) {
  if (process.dim() != background.dim()) {
    throw std::invalid_argument("compute_s1: perturbation and background dimensions differ");
  }
  auto quad = std::make_shared<const KickQuadrature>(background, process.interval(), nodes,
                                                     flow_max_step);
  KickEnsemble ens(quad, {process.realization(realization)}, {realization});
  return ens.member(0);
}

// ---------------------------------------------------------------------------

S2MeanEstimate::S2MeanEstimate(const PerturbationProcess& process, const ScalarField& background,
                               int realizations, int nodes, double flow_max_step)
    : quadrature_(std::make_shared<const KickQuadrature>(background, process.interval(), nodes,
                                                         flow_max_step)) {
  if (realizations < 1) throw std::invalid_argument("compute_s2_mean: need >= 1 realization");
  if (process.dim() != background.dim()) {
    throw std::invalid_argument("compute_s2_mean: perturbation and background dimensions differ");
  }
  members_.reserve(static_cast<std::size_t>(realizations));
  for (int r = 0; r < realizations; ++r) {
    members_.push_back(process.realization(static_cast<std::uint64_t>(r)));
  }
  info_.nodes = nodes;
  info_.flow_max_step = flow_max_step;
  info_.realizations = realizations;
  info_.rule = "gauss-legendre, square-to-triangle map b = a*u";

  // Triangle 0 <= b <= a <= tau: outer rule in a, inner rule in u on [0,1].
  const QuadratureRule& outer = quadrature_->rule();
  const QuadratureRule unit = gauss_legendre(nodes, 0.0, 1.0);
  struct Tagged {
    double lambda;
    std::size_t slot;
  };
  std::vector<Tagged> all;
  const std::size_t n = outer.nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    all.push_back({outer.nodes[i], i});
    for (std::size_t j = 0; j < n; ++j) {
      all.push_back({outer.nodes[i] * unit.nodes[j], n + i * n + j});
      pair_weight_.push_back(outer.weights[i] * outer.nodes[i] * unit.weights[j]);
    }
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Tagged& a, const Tagged& b) { return a.lambda < b.lambda; });
  std::vector<std::size_t> slot_to_index(all.size());
  for (const Tagged& t : all) {
    if (lambdas_.empty() || lambdas_.back() != t.lambda) lambdas_.push_back(t.lambda);
    slot_to_index[t.slot] = lambdas_.size() - 1;
  }
  outer_idx_.assign(slot_to_index.begin(), slot_to_index.begin() + static_cast<std::ptrdiff_t>(n));
  inner_idx_.assign(slot_to_index.begin() + static_cast<std::ptrdiff_t>(n), slot_to_index.end());
}

Vector S2MeanEstimate::samples(const Vector& z) const {
  const PullbackSnapshot snap = quadrature_->pullback(z, lambdas_);
  const double tau = quadrature_->interval();
  const std::size_t n = outer_idx_.size();
  const auto r_count = static_cast<Eigen::Index>(members_.size());
  Vector out(r_count);
  std::vector<Vector> grads(lambdas_.size());
  for (Eigen::Index r = 0; r < r_count; ++r) {
    const PerturbationRealization& h = members_[static_cast<std::size_t>(r)];
    for (std::size_t l = 0; l < lambdas_.size(); ++l) {
      grads[l] = snap.tangents[l].transpose() * h.gradient(tau - lambdas_[l], snap.points[l]);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vector j_grad_a = apply_symplectic(grads[outer_idx_[i]]);
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t pj = i * n + j;
        acc += pair_weight_[pj] * grads[inner_idx_[pj]].dot(j_grad_a);
      }
    }
    const double value = 0.5 * acc;
    if (!std::isfinite(value)) throw IntegrationFailure("compute_s2_mean: non-finite bracket", 0.0);
    out[r] = value;
  }
  return out;
}

namespace {

S2MeanEstimate::Value mean_and_se(const Vector& x) {
  const double n = static_cast<double>(x.size());
  const double mean = x.mean();
  if (x.size() < 2) return {mean, 0.0};
  const double var = (x.array() - mean).square().sum() / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

}  // namespace

S2MeanEstimate::Value S2MeanEstimate::evaluate(const Vector& z) const { return mean_and_se(samples(z)); }

S2MeanEstimate::Gradient S2MeanEstimate::gradient(const Vector& z) const {
  const auto d = z.size();
  Gradient g{Vector(d), Vector(d)};
  Vector zp = z;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double h = fd::step(z[i]);
    zp[i] = z[i] + h;
    const Vector fp = samples(zp);
    zp[i] = z[i] - h;
    const Vector fm = samples(zp);
    zp[i] = z[i];
    const Value v = mean_and_se((fp - fm) / (2.0 * h));
    g.mean[i] = v.mean;
    g.standard_error[i] = v.standard_error;
  }
  return g;
}

ScalarField S2MeanEstimate::field() const {
  auto self = std::make_shared<const S2MeanEstimate>(*this);
  return ScalarField(
      quadrature_->dim(), [self](const Vector& z) { return self->evaluate(z).mean; },
      [self](const Vector& z) { return self->gradient(z).mean; }, Provenance::interpolated);
}

KickResult compute_kicks(const PerturbationProcess& process, const ScalarField& background,
                         int realizations, int nodes, double flow_max_step) {
  auto quad = std::make_shared<const KickQuadrature>(background, process.interval(), nodes,
                                                     flow_max_step);
  std::vector<PerturbationRealization> members;
  for (int r = 0; r < realizations; ++r) members.push_back(process.realization(static_cast<std::uint64_t>(r)));
  KickEnsemble ens(quad, std::move(members));
  S2MeanEstimate s2(process, background, realizations, nodes, flow_max_step);
  KickResult out{{}, s2.field(), s2.info()};
  for (std::size_t j = 0; j < ens.size(); ++j) out.s1.push_back(ens.member(j));
  return out;
}

}  // namespace stochacc
