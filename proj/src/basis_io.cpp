#include "stochacc/basis_io.hpp"

#include <memory>
#include <stdexcept>

#include "json.hpp"

namespace stochacc {

using nlohmann::json;

BasisRecord make_basis_record(const NoiseBasis& basis, const std::string& problem, std::uint64_t seed) {
  const SampleSet& s = basis.samples();
  if (!s.kicks()) throw std::invalid_argument("make_basis_record: basis was not built from kick samples");
  const KickEnsemble& k = *s.kicks();
  BasisRecord r;
  r.problem = problem;
  r.seed = seed;
  r.realizations = k.realization_indices();
  r.quadrature.nodes = k.quadrature().nodes();
  r.quadrature.flow_max_step = k.quadrature().flow_max_step();
  r.quadrature.realizations = static_cast<int>(k.size());
  r.probe_description = s.grid().description;
  for (const Vector& p : s.grid().points) r.probe_points.emplace_back(p.data(), p.data() + p.size());
  r.probe_weights = s.grid().weights;
  r.eigenvalues = basis.eigenvalues();
  r.numerical_rank = basis.numerical_rank();
  const Matrix& c = basis.coefficients();
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(c.cols()));
    for (Eigen::Index j = 0; j < c.cols(); ++j) row[static_cast<std::size_t>(j)] = c(i, j);
    r.coefficients.push_back(std::move(row));
  }
  return r;
}

std::string basis_to_json(const BasisRecord& r) {
  json j;
  j["problem"] = r.problem;
  j["seed"] = r.seed;
  j["realizations"] = r.realizations;
  j["quadrature"] = {{"rule", r.quadrature.rule},
                     {"nodes", r.quadrature.nodes},
                     {"flow_max_step", r.quadrature.flow_max_step},
                     {"realizations", r.quadrature.realizations}};
  j["probe"] = {{"description", r.probe_description}, {"points", r.probe_points}, {"weights", r.probe_weights}};
  j["eigenvalues"] = r.eigenvalues;
  j["numerical_rank"] = r.numerical_rank;
  j["rank"] = r.coefficients.size();
  j["coefficients"] = r.coefficients;
  return j.dump(1) + "\n";
}

BasisRecord basis_from_json(const std::string& text) {
  const json j = json::parse(text);
  BasisRecord r;
  r.problem = j.at("problem").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.realizations = j.at("realizations").get<std::vector<std::uint64_t>>();
  const json& q = j.at("quadrature");
  r.quadrature.rule = q.at("rule").get<std::string>();
  r.quadrature.nodes = q.at("nodes").get<int>();
  r.quadrature.flow_max_step = q.at("flow_max_step").get<double>();
  r.quadrature.realizations = q.at("realizations").get<int>();
  r.probe_description = j.at("probe").at("description").get<std::string>();
  r.probe_points = j.at("probe").at("points").get<std::vector<std::vector<double>>>();
  r.probe_weights = j.at("probe").at("weights").get<std::vector<double>>();
  r.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
  r.numerical_rank = j.at("numerical_rank").get<std::size_t>();
  r.coefficients = j.at("coefficients").get<std::vector<std::vector<double>>>();
  return r;
}

std::vector<ScalarField> rebuild_modes(const BasisRecord& r, const PerturbationProcess& process,
                                       const ScalarField& background) {
  if (process.seed() != r.seed) throw std::invalid_argument("rebuild_modes: process seed differs from the record");
  auto quad = std::make_shared<const KickQuadrature>(background, process.interval(), r.quadrature.nodes,
                                                     r.quadrature.flow_max_step);
  std::vector<PerturbationRealization> members;
  for (std::uint64_t i : r.realizations) members.push_back(process.realization(i));
  const KickEnsemble ens(quad, std::move(members), r.realizations);
  std::vector<ScalarField> out;
  for (const auto& row : r.coefficients) {
    if (row.size() != r.realizations.size()) throw std::invalid_argument("rebuild_modes: coefficient row length");
    out.push_back(ens.combination(Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(row.size()))));
  }
  return out;
}

}  // namespace stochacc
