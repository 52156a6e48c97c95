#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "stochacc/phase_space.hpp"
#include "stochacc/sde.hpp"

namespace stochacc {

/// Moments of one time slice. Standard errors come from batch means over
/// floor(sqrt(N)) contiguous batches.
struct MomentSlice {
  double t = 0.0;
  std::size_t count = 0;
  Vector mean;
  Matrix covariance;  // unbiased
  Vector mean_se;
  Matrix covariance_se;
};

struct EnsembleSummary {
  std::vector<MomentSlice> slices;
  std::vector<std::string> observables;
  std::uint64_t seed = 0;
  std::string scheme;
  double h = 0.0;
};

/// Moments of the rows of `samples` (N x d).
MomentSlice sample_moments(const Matrix& samples, double t = 0.0);

using Observable = std::function<double(const Vector&)>;

/// Observables evaluated on every path at each requested time; an empty
/// observable list means the raw coordinates.
EnsembleSummary estimate_moments(const std::vector<std::vector<PathState>>& paths,
                                 const std::vector<Observable>& observables,
                                 const std::vector<double>& times);

/// Mean and batch-means standard error of a scalar sample.
struct ScalarEstimate {
  double mean = 0.0;
  double se = 0.0;
};
ScalarEstimate estimate_mean(const std::vector<double>& x);

/// Unbiased variance with a batch-means standard error.
ScalarEstimate estimate_variance(const std::vector<double>& x);

struct DispersionPoint {
  double t = 0.0;
  double dx2 = 0.0;
  double dx2_se = 0.0;
  double dv2 = 0.0;
  double dv2_se = 0.0;
};

using PairRun = std::pair<std::vector<PathState>, std::vector<PathState>>;

/// E|x_A - x_B|^2 and E|v_A - v_B|^2 (position / momentum halves).
std::vector<DispersionPoint> dispersion_curve(const std::vector<PairRun>& pairs,
                                              const std::vector<double>& times);

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.95;
};

/// Least squares of log(error) on log(h) with a Student-t interval.
OrderFit weak_order_fit(const std::vector<double>& h, const std::vector<double>& errors,
                        double confidence = 0.95);

/// path_id,t,coord_0..coord_{d-1}
void write_paths_csv(std::ostream& os, const std::vector<std::vector<PathState>>& paths,
                     std::uint64_t first_id = 0);
/// t,count,observable,mean,mean_se,variance,variance_se
void write_summary_csv(std::ostream& os, const EnsembleSummary& summary);

}  // namespace stochacc
