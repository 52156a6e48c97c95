#include "stochacc/noise_basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stochacc/parallel.hpp"
#include "stochacc/wiener.hpp"

namespace stochacc {

ProbeGrid ProbeGrid::box(const Vector& lo, const Vector& hi, const std::vector<int>& per_axis) {
  if (lo.size() != hi.size() || static_cast<std::size_t>(lo.size()) != per_axis.size()) {
    throw std::invalid_argument("ProbeGrid::box: bounds and axis counts must share dimension");
  }
  const auto d = lo.size();
  std::size_t total = 1;
  double volume = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (per_axis[static_cast<std::size_t>(i)] < 1 || !(hi[i] > lo[i])) {
      throw std::invalid_argument("ProbeGrid::box: need hi > lo and >= 1 point per axis");
    }
    total *= static_cast<std::size_t>(per_axis[static_cast<std::size_t>(i)]);
    volume *= hi[i] - lo[i];
  }
  ProbeGrid grid;
  grid.points.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Vector p(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      p[i] = lo[i] + (hi[i] - lo[i]) * (idx[ui] + 0.5) / per_axis[ui];
    }
    grid.points.push_back(std::move(p));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (++idx[i] < per_axis[i]) break;
      idx[i] = 0;
    }
  }
  grid.weights.assign(total, volume / static_cast<double>(total));
  std::ostringstream os;
  os << "midpoint tensor grid, " << total << " points";
  grid.description = os.str();
  return grid;
}

ProbeGrid ProbeGrid::random_box(const Vector& lo, const Vector& hi, std::size_t count,
                                std::uint64_t seed) {
  if (lo.size() != hi.size() || count == 0) {
    throw std::invalid_argument("ProbeGrid::random_box: bad bounds or empty grid");
  }
  double volume = 1.0;
  for (Eigen::Index i = 0; i < lo.size(); ++i) volume *= hi[i] - lo[i];
  ProbeGrid grid;
  for (std::size_t n = 0; n < count; ++n) {
    rng::CounterRng r(seed, rng::Stream::probe, n);
    Vector p(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) p[i] = lo[i] + (hi[i] - lo[i]) * r.uniform();
    grid.points.push_back(std::move(p));
  }
  grid.weights.assign(count, volume / static_cast<double>(count));
  std::ostringstream os;
  os << "uniform random box, " << count << " points, seed " << seed;
  grid.description = os.str();
  return grid;
}

// ---------------------------------------------------------------------------

SampleSet::SampleSet(std::vector<ScalarField> fields, ProbeGrid grid)
    : fields_(std::move(fields)), grid_(std::move(grid)) {
  validate();
}

SampleSet::SampleSet(KickEnsemble kicks, ProbeGrid grid)
    : kicks_(std::move(kicks)), grid_(std::move(grid)) {
  validate();
}

void SampleSet::validate() const {
  if (size() < 1) throw std::invalid_argument("sample set is empty");
  if (grid_.points.empty() || grid_.points.size() != grid_.weights.size()) {
    throw std::invalid_argument("probe grid needs matching, nonempty points and weights");
  }
  for (double w : grid_.weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("probe weights must be positive");
  }
  for (const Vector& p : grid_.points) {
    if (static_cast<std::size_t>(p.size()) != dim()) {
      throw std::invalid_argument("probe point dimension differs from sample dimension");
    }
  }
}

std::size_t SampleSet::size() const { return kicks_ ? kicks_->size() : fields_.size(); }

std::size_t SampleSet::dim() const {
  if (kicks_) return kicks_->dim();
  return fields_.empty() ? 0 : fields_.front().dim();
}

Matrix SampleSet::gradients(const Vector& z) const {
  if (kicks_) return kicks_->gradients(z);
  Matrix out(z.size(), static_cast<Eigen::Index>(fields_.size()));
  for (std::size_t j = 0; j < fields_.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = fields_[j].gradient(z);
  }
  return out;
}

ScalarField SampleSet::member(std::size_t j) const {
  if (kicks_) return kicks_->member(j);
  return fields_.at(j);
}

ScalarField SampleSet::combination(const Vector& coefficients) const {
  if (kicks_) return kicks_->combination(coefficients);
  if (static_cast<std::size_t>(coefficients.size()) != fields_.size()) {
    throw std::invalid_argument("combination: coefficient count differs from sample count");
  }
  auto fields = std::make_shared<const std::vector<ScalarField>>(fields_);
  auto value = [fields, coefficients](const Vector& z) {
    double acc = 0.0;
    for (std::size_t j = 0; j < fields->size(); ++j) {
      const double c = coefficients[static_cast<Eigen::Index>(j)];
      if (c != 0.0) acc += c * (*fields)[j].value(z);
    }
    return acc;
  };
  auto gradient = [fields, coefficients](const Vector& z) {
    Vector acc = Vector::Zero(z.size());
    for (std::size_t j = 0; j < fields->size(); ++j) {
      const double c = coefficients[static_cast<Eigen::Index>(j)];
      if (c != 0.0) acc += c * (*fields)[j].gradient(z);
    }
    return acc;
  };
  return ScalarField(dim(), std::move(value), std::move(gradient), Provenance::sample_combination);
}

Matrix SampleSet::snapshot_matrix(std::size_t threads) const {
  const auto d = static_cast<Eigen::Index>(dim());
  const auto m = grid_.points.size();
  Matrix f(d * static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(size()));
  parallel_for(m, threads, [&](std::size_t i) {
    const double s = std::sqrt(grid_.weights[i]);
    f.middleRows(static_cast<Eigen::Index>(i) * d, d) = s * gradients(grid_.points[i]);
  });
  return f;
}

// ---------------------------------------------------------------------------

NoiseBasis::NoiseBasis(std::shared_ptr<const SampleSet> samples, std::vector<double> eigenvalues,
                       Matrix coefficients, Matrix mode_snapshots, std::size_t numerical_rank)
    : samples_(std::move(samples)),
      eigenvalues_(std::move(eigenvalues)),
      coefficients_(std::move(coefficients)),
      mode_snapshots_(std::move(mode_snapshots)),
      numerical_rank_(numerical_rank) {}

ScalarField NoiseBasis::mode(std::size_t k) const {
  if (k >= rank()) throw std::out_of_range("noise basis mode index");
  return samples_->combination(coefficients_.row(static_cast<Eigen::Index>(k)).transpose());
}

VectorField NoiseBasis::mode_field(std::size_t k) const { return VectorField::hamiltonian(mode(k)); }

std::vector<ScalarField> NoiseBasis::modes() const {
  std::vector<ScalarField> out;
  for (std::size_t k = 0; k < rank(); ++k) out.push_back(mode(k));
  return out;
}

Matrix NoiseBasis::mode_gradients(const Vector& z) const {
  return samples_->gradients(z) * coefficients_.transpose();
}

Matrix NoiseBasis::normalized_mode_gram() const {
  Matrix g = mode_snapshots_.transpose() * mode_snapshots_;
  for (Eigen::Index j = 0; j < g.rows(); ++j) {
    for (Eigen::Index k = 0; k < g.cols(); ++k) {
      g(j, k) /= std::sqrt(eigenvalues_[static_cast<std::size_t>(j)] *
                           eigenvalues_[static_cast<std::size_t>(k)]);
    }
  }
  return g;
}

Matrix NoiseBasis::project(const SampleSet& fresh, std::size_t threads) const {
  const Matrix f = fresh.snapshot_matrix(threads);
  if (f.rows() != mode_snapshots_.rows()) {
    throw std::invalid_argument("project: fresh samples must use the same probe grid");
  }
  Matrix xi = mode_snapshots_.transpose() * f;
  for (Eigen::Index k = 0; k < xi.rows(); ++k) xi.row(k) /= eigenvalues_[static_cast<std::size_t>(k)];
  return xi;
}

// ---------------------------------------------------------------------------

namespace {

Matrix symplectic_columns(const Matrix& grads) {
  Matrix out(grads.rows(), grads.cols());
  for (Eigen::Index j = 0; j < grads.cols(); ++j) out.col(j) = apply_symplectic(grads.col(j));
  return out;
}

}  // namespace

Matrix covariance(const Vector& z1, const Vector& z2, const SampleSet& samples) {
  if (static_cast<std::size_t>(z1.size()) != samples.dim() ||
      static_cast<std::size_t>(z2.size()) != samples.dim()) {
    throw std::invalid_argument("covariance: point dimension differs from sample dimension");
  }
  const Matrix x1 = symplectic_columns(samples.gradients(z1));
  const Matrix x2 = symplectic_columns(samples.gradients(z2));
  return x1 * x2.transpose() / static_cast<double>(samples.size());
}

Matrix basis_covariance(const NoiseBasis& basis, const Vector& z1, const Vector& z2) {
  const Matrix x1 = symplectic_columns(basis.mode_gradients(z1));
  const Matrix x2 = symplectic_columns(basis.mode_gradients(z2));
  return x1 * x2.transpose();
}

NoiseBasis build_basis(std::shared_ptr<const SampleSet> samples, const Truncation& truncation,
                       std::size_t threads) {
  if (!samples) throw std::invalid_argument("build_basis: null sample set");
  if (samples->size() < 2) throw std::invalid_argument("build_basis: need at least 2 samples");
  const Matrix f = samples->snapshot_matrix(threads);
  if (!f.allFinite()) throw std::runtime_error("build_basis: non-finite Gram entries");
  const Eigen::Index k_count = f.cols();
  const double inv_k = 1.0 / static_cast<double>(k_count);

  // Eigenpairs of the K x K Gram matrix F^T F / K. When K exceeds the probe
  // dimension the same pairs come from F F^T / K (identical nonzero spectrum),
  // mapped back through F^T so modes stay combinations of the samples.
  std::vector<double> evals;
  Matrix gram_vectors;  // columns: unit eigenvectors of the Gram matrix
  if (k_count <= f.rows()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(inv_k * (f.transpose() * f));
    if (es.info() != Eigen::Success) throw std::runtime_error("build_basis: eigensolver failed");
    const Eigen::Index n = es.eigenvalues().size();
    gram_vectors.resize(k_count, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      evals.push_back(std::max(0.0, es.eigenvalues()[n - 1 - i]));
      gram_vectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(inv_k * (f * f.transpose()));
    if (es.info() != Eigen::Success) throw std::runtime_error("build_basis: eigensolver failed");
    const Eigen::Index n = es.eigenvalues().size();
    gram_vectors = Matrix::Zero(k_count, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lam = std::max(0.0, es.eigenvalues()[n - 1 - i]);
      evals.push_back(lam);
      if (lam > 0.0) {
        gram_vectors.col(i) =
            f.transpose() * es.eigenvectors().col(n - 1 - i) / std::sqrt(lam / inv_k);
      }
    }
  }

  const double lmax = evals.empty() ? 0.0 : evals.front();
  std::size_t numerical_rank = 0;
  for (double l : evals) {
    if (l > truncation.rank_tolerance * lmax && l > 0.0) ++numerical_rank;
  }
  if (numerical_rank == 0) throw UnderSampledError("build_basis: samples have zero numerical rank");

  std::size_t rank = 0;
  if (truncation.rank) {
    rank = *truncation.rank;
    if (rank == 0) throw std::invalid_argument("build_basis: requested rank must be >= 1");
    if (rank > numerical_rank) {
      std::ostringstream os;
      os << "build_basis: requested rank " << rank << " exceeds numerical rank " << numerical_rank
         << " of the sample Gram matrix (under-sampled)";
      throw UnderSampledError(os.str());
    }
  } else {
    if (!(truncation.energy > 0.0 && truncation.energy <= 1.0)) {
      throw std::invalid_argument("build_basis: energy fraction must lie in (0, 1]");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < numerical_rank; ++i) total += evals[i];
    double cum = 0.0;
    for (std::size_t i = 0; i < numerical_rank; ++i) {
      cum += evals[i];
      rank = i + 1;
      if (cum >= truncation.energy * total) break;
    }
  }

  const auto r = static_cast<Eigen::Index>(rank);
  Matrix coeffs(r, k_count);
  for (Eigen::Index i = 0; i < r; ++i) {
    Vector v = gram_vectors.col(i);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    coeffs.row(i) = (v * std::sqrt(inv_k)).transpose();
  }
  Matrix mode_snapshots = f * coeffs.transpose();
  return NoiseBasis(std::move(samples), std::move(evals), std::move(coeffs),
                    std::move(mode_snapshots), numerical_rank);
}

double reconstruction_residual(const NoiseBasis& basis, const SampleSet& samples,
                               const std::vector<std::pair<Vector, Vector>>& test_pairs) {
  double worst = 0.0;
  for (const auto& [z1, z2] : test_pairs) {
    const Matrix emp = covariance(z1, z2, samples);
    const Matrix model = basis_covariance(basis, z1, z2);
    const double denom = emp.norm();
    const double err = (emp - model).norm();
    const double rel = denom > 0.0 ? err / denom : err;
    worst = std::max(worst, rel);
  }
  return worst;
}

double correlation_residual(const NoiseBasis& basis, const SampleSet& samples,
                            const std::vector<std::pair<Vector, Vector>>& test_pairs) {
  double worst = 0.0;
  for (const auto& [z1, z2] : test_pairs) {
    const double scale = std::sqrt(covariance(z1, z1, samples).norm() * covariance(z2, z2, samples).norm());
    const double err = (covariance(z1, z2, samples) - basis_covariance(basis, z1, z2)).norm();
    worst = std::max(worst, scale > 0.0 ? err / scale : err);
  }
  return worst;
}

namespace {

Matrix orthonormal_columns(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  const double tol = s.size() > 0 ? 1e-10 * s[0] : 0.0;
  while (r < s.size() && s[r] > tol) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace

double max_principal_angle(const Matrix& a, const Matrix& b) {
  const Matrix qa = orthonormal_columns(a);
  const Matrix qb = orthonormal_columns(b);
  if (qa.cols() == 0 || qb.cols() == 0) return std::acos(0.0);
  // Larger span projected onto the smaller one: sin(theta_max) is the largest
  // residual norm of a unit vector of the smaller span.
  const Matrix& small = qa.cols() <= qb.cols() ? qa : qb;
  const Matrix& large = qa.cols() <= qb.cols() ? qb : qa;
  const Matrix resid = small - large * (large.transpose() * small);
  Eigen::JacobiSVD<Matrix> svd(resid);
  const double s = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  double angle = std::asin(std::min(1.0, s));
  if (qa.cols() != qb.cols()) angle = std::acos(0.0);
  return angle;
}

double procrustes_residual(const Matrix& fields, const Matrix& reference) {
  if (fields.rows() != reference.rows() || fields.cols() != reference.cols()) {
    throw std::invalid_argument("procrustes_residual: snapshot shapes differ");
  }
  const double norm = reference.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("procrustes_residual: reference is zero");
  Eigen::JacobiSVD<Matrix> svd(fields.transpose() * reference, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix r = svd.matrixU() * svd.matrixV().transpose();
  return (fields * r - reference).norm() / norm;
}

Matrix field_snapshots(const std::vector<ScalarField>& fields, const ProbeGrid& grid) {
  if (fields.empty()) return {};
  const auto d = static_cast<Eigen::Index>(fields.front().dim());
  Matrix out(d * static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double s = std::sqrt(grid.weights[m]);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      out.block(static_cast<Eigen::Index>(m) * d, static_cast<Eigen::Index>(j), d, 1) =
          s * fields[j].gradient(grid.points[m]);
    }
  }
  return out;
}

}  // namespace stochacc
