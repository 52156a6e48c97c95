#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stochacc/kick_operators.hpp"
#include "stochacc/phase_space.hpp"

namespace stochacc {

/// Probe points with positive weights; together they define the sampling
/// measure of the empirical inner product on vector fields.
struct ProbeGrid {
  std::vector<Vector> points;
  std::vector<double> weights;
  std::string description;

  std::size_t size() const { return points.size(); }

  /// Tensor grid of cell midpoints over [lo, hi], equal weights summing to the
  /// box volume.
  static ProbeGrid box(const Vector& lo, const Vector& hi, const std::vector<int>& per_axis);
  /// Uniform random points in [lo, hi] with weights volume/count.
  static ProbeGrid random_box(const Vector& lo, const Vector& hi, std::size_t count,
                              std::uint64_t seed);
};

/// Raised when a requested rank exceeds the numerical rank of the samples.
class UnderSampledError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// K realizations of s1 plus the probe grid.
class SampleSet {
 public:
  SampleSet(std::vector<ScalarField> fields, ProbeGrid grid);
  SampleSet(KickEnsemble kicks, ProbeGrid grid);

  std::size_t size() const;
  std::size_t dim() const;
  const ProbeGrid& grid() const { return grid_; }
  const std::optional<KickEnsemble>& kicks() const { return kicks_; }

  /// dim x K; column j is grad s1^(j)(z).
  Matrix gradients(const Vector& z) const;
  ScalarField member(std::size_t j) const;
  ScalarField combination(const Vector& coefficients) const;

  /// Weighted snapshot matrix (dim*M x K): block m is sqrt(w_m) grad s1(z_m).
  /// X_s = J grad s and J is orthogonal, so this carries the vector-field
  /// inner product.
  Matrix snapshot_matrix(std::size_t threads = 1) const;

 private:
  void validate() const;

  std::vector<ScalarField> fields_;
  std::optional<KickEnsemble> kicks_;
  ProbeGrid grid_;
};

struct Truncation {
  std::optional<std::size_t> rank;
  double energy = 0.999;
  /// Eigenvalues at or below rank_tolerance * lambda_max are numerically zero.
  double rank_tolerance = 1e-10;
};

/// Orthonormal basis of the noise space: alpha(z1, z2) ~ sum_k X_{H_k}(z1) (x) X_{H_k}(z2),
/// with H_k = sum_j c_kj s1^(j).
class NoiseBasis {
 public:
  NoiseBasis(std::shared_ptr<const SampleSet> samples, std::vector<double> eigenvalues,
             Matrix coefficients, Matrix mode_snapshots, std::size_t numerical_rank);

  std::size_t rank() const { return static_cast<std::size_t>(coefficients_.rows()); }
  std::size_t numerical_rank() const { return numerical_rank_; }
  /// All eigenvalues of the sample Gram matrix, descending (kept and dropped).
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  /// rank x K
  const Matrix& coefficients() const { return coefficients_; }
  const SampleSet& samples() const { return *samples_; }
  std::shared_ptr<const SampleSet> samples_ptr() const { return samples_; }

  ScalarField mode(std::size_t k) const;
  VectorField mode_field(std::size_t k) const;
  std::vector<ScalarField> modes() const;

  /// dim x rank; column k is grad H_k(z).
  Matrix mode_gradients(const Vector& z) const;
  /// Gram matrix of the modes in the probe inner product, normalized by
  /// sqrt(lambda_j lambda_k); identity for an orthonormal set.
  Matrix normalized_mode_gram() const;
  /// KL coefficients xi_k = <X_s, X_{H_k}>_mu / lambda_k for each fresh sample
  /// (rank x K_fresh). The fresh set must share the probe grid.
  Matrix project(const SampleSet& fresh, std::size_t threads = 1) const;

 private:
  std::shared_ptr<const SampleSet> samples_;
  std::vector<double> eigenvalues_;
  Matrix coefficients_;
  Matrix mode_snapshots_;  // dim*M x rank, weighted like the sample snapshots
  std::size_t numerical_rank_;
};

/// Empirical two-point covariance alpha(z1, z2) = mean_j X_{s1^(j)}(z1) (x) X_{s1^(j)}(z2).
Matrix covariance(const Vector& z1, const Vector& z2, const SampleSet& samples);

/// Model tensor sum_k X_{H_k}(z1) (x) X_{H_k}(z2).
Matrix basis_covariance(const NoiseBasis& basis, const Vector& z1, const Vector& z2);

/// Snapshot KL decomposition of the s1 samples.
NoiseBasis build_basis(std::shared_ptr<const SampleSet> samples, const Truncation& truncation,
                       std::size_t threads = 1);

/// Max relative Frobenius error between the empirical covariance of `samples`
/// and the basis reconstruction over the test pairs.
double reconstruction_residual(const NoiseBasis& basis, const SampleSet& samples,
                               const std::vector<std::pair<Vector, Vector>>& test_pairs);

/// As above but each pair's error is divided by
/// sqrt(|alpha(z1, z1)|_F |alpha(z2, z2)|_F), which stays well conditioned
/// where the two-point covariance itself nearly vanishes.
double correlation_residual(const NoiseBasis& basis, const SampleSet& samples,
                            const std::vector<std::pair<Vector, Vector>>& test_pairs);

/// Largest principal angle (radians) between the spans of two sets of
/// vector fields sampled on a probe grid (columns of the weighted snapshots).
double max_principal_angle(const Matrix& a, const Matrix& b);

/// min over orthogonal R of |F R - G|_F / |G|_F for snapshot matrices of equal
/// shape: how well a mode set matches a reference set up to a rotation.
double procrustes_residual(const Matrix& fields, const Matrix& reference);

/// Weighted snapshot of arbitrary scalar fields' Hamiltonian vector fields on
/// a grid (dim*M x count).
Matrix field_snapshots(const std::vector<ScalarField>& fields, const ProbeGrid& grid);

}  // namespace stochacc
