#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stochacc/kick_operators.hpp"
#include "stochacc/noise_basis.hpp"

namespace stochacc {

/// Everything needed to rebuild H_k = sum_j c_kj s1^(j): the perturbation
/// seed and realization indices, the quadrature, the probe grid and the
/// coefficients.
struct BasisRecord {
  std::string problem;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> realizations;
  QuadratureInfo quadrature;
  std::string probe_description;
  std::vector<std::vector<double>> probe_points;
  std::vector<double> probe_weights;
  std::vector<double> eigenvalues;
  std::size_t numerical_rank = 0;
  std::vector<std::vector<double>> coefficients;  // rank x K
};

BasisRecord make_basis_record(const NoiseBasis& basis, const std::string& problem, std::uint64_t seed);

std::string basis_to_json(const BasisRecord& r);
BasisRecord basis_from_json(const std::string& text);

/// H_k from a record and the same perturbation process it was built from.
std::vector<ScalarField> rebuild_modes(const BasisRecord& r, const PerturbationProcess& process,
                                       const ScalarField& background);

}  // namespace stochacc
