#include "stochacc/stats.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace stochacc {

namespace {

std::size_t batch_count(std::size_t n) {
  if (n < 4) return n;
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n)))));
}

std::pair<std::size_t, std::size_t> batch_range(std::size_t b, std::size_t batches, std::size_t n) {
  return {b * n / batches, (b + 1) * n / batches};
}

Matrix unbiased_covariance(const Matrix& rows, Eigen::Index lo, Eigen::Index hi) {
  const Eigen::Index n = hi - lo;
  const Matrix block = rows.middleRows(lo, n);
  const Vector mean = block.colwise().mean().transpose();
  const Matrix centered = block.rowwise() - mean.transpose();
  if (n < 2) return Matrix::Constant(rows.cols(), rows.cols(), std::numeric_limits<double>::quiet_NaN());
  return centered.transpose() * centered / static_cast<double>(n - 1);
}

}  // namespace

MomentSlice sample_moments(const Matrix& samples, double t) {
  const auto n = static_cast<std::size_t>(samples.rows());
  if (n < 2) throw std::invalid_argument("sample_moments: need at least 2 samples");
  const Eigen::Index d = samples.cols();
  MomentSlice s;
  s.t = t;
  s.count = n;
  s.mean = samples.colwise().mean().transpose();
  s.covariance = unbiased_covariance(samples, 0, samples.rows());
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose());

  const std::size_t batches = batch_count(n);
  Matrix means(static_cast<Eigen::Index>(batches), d);
  std::vector<Matrix> covs;
  for (std::size_t b = 0; b < batches; ++b) {
    const auto [lo, hi] = batch_range(b, batches, n);
    const auto l = static_cast<Eigen::Index>(lo);
    const auto h = static_cast<Eigen::Index>(hi);
    means.row(static_cast<Eigen::Index>(b)) = samples.middleRows(l, h - l).colwise().mean();
    covs.push_back(unbiased_covariance(samples, l, h));
  }
  const double bb = static_cast<double>(batches);
  const Vector mm = means.colwise().mean().transpose();
  s.mean_se = ((means.rowwise() - mm.transpose()).array().square().colwise().sum().transpose() /
               (bb - 1.0) / bb)
                  .sqrt();
  Matrix cm = Matrix::Zero(d, d);
  for (const Matrix& c : covs) cm += c;
  cm /= bb;
  Matrix cv = Matrix::Zero(d, d);
  for (const Matrix& c : covs) cv.array() += (c - cm).array().square();
  s.covariance_se = (cv.array() / (bb - 1.0) / bb).sqrt().matrix();
  return s;
}

ScalarEstimate estimate_mean(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("estimate_mean: need at least 2 samples");
  const Matrix m = Eigen::Map<const Matrix>(x.data(), static_cast<Eigen::Index>(x.size()), 1);
  const MomentSlice s = sample_moments(m);
  return {s.mean[0], s.mean_se[0]};
}

ScalarEstimate estimate_variance(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("estimate_variance: need at least 2 samples");
  const Matrix m = Eigen::Map<const Matrix>(x.data(), static_cast<Eigen::Index>(x.size()), 1);
  const MomentSlice s = sample_moments(m);
  return {s.covariance(0, 0), s.covariance_se(0, 0)};
}

namespace {

const PathState& state_at(const std::vector<PathState>& path, double t) {
  for (const PathState& s : path) {
    if (std::abs(s.t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return s;
  }
  std::ostringstream os;
  os << "time " << t << " is not on the recorded grid";
  throw std::invalid_argument(os.str());
}

}  // namespace

EnsembleSummary estimate_moments(const std::vector<std::vector<PathState>>& paths,
                                 const std::vector<Observable>& observables,
                                 const std::vector<double>& times) {
  if (paths.size() < 2) throw std::invalid_argument("estimate_moments: need at least 2 paths");
  if (paths.front().empty()) throw std::invalid_argument("estimate_moments: empty path");
  const auto dim = paths.front().front().z.size();
  const Eigen::Index d = observables.empty() ? dim : static_cast<Eigen::Index>(observables.size());
  EnsembleSummary out;
  for (Eigen::Index k = 0; k < d; ++k) {
    out.observables.push_back(observables.empty() ? "coord_" + std::to_string(k) : "obs_" + std::to_string(k));
  }
  for (double t : times) {
    Matrix rows(static_cast<Eigen::Index>(paths.size()), d);
    for (std::size_t p = 0; p < paths.size(); ++p) {
      const Vector& z = state_at(paths[p], t).z;
      for (Eigen::Index k = 0; k < d; ++k) {
        rows(static_cast<Eigen::Index>(p), k) =
            observables.empty() ? z[k] : observables[static_cast<std::size_t>(k)](z);
      }
    }
    out.slices.push_back(sample_moments(rows, t));
  }
  return out;
}

std::vector<DispersionPoint> dispersion_curve(const std::vector<PairRun>& pairs,
                                              const std::vector<double>& times) {
  if (pairs.size() < 2) throw std::invalid_argument("dispersion_curve: need at least 2 pairs");
  std::vector<DispersionPoint> out;
  for (double t : times) {
    std::vector<double> dx2, dv2;
    for (const PairRun& p : pairs) {
      if (p.first.size() != p.second.size()) throw std::invalid_argument("dispersion_curve: mismatched time grids");
      const Vector& a = state_at(p.first, t).z;
      const Vector& b = state_at(p.second, t).z;
      if (a.size() != b.size()) throw std::invalid_argument("dispersion_curve: mismatched dimensions");
      const Eigen::Index n = a.size() / 2;
      dx2.push_back((a.head(n) - b.head(n)).squaredNorm());
      dv2.push_back((a.tail(n) - b.tail(n)).squaredNorm());
    }
    const ScalarEstimate ex = estimate_mean(dx2);
    const ScalarEstimate ev = estimate_mean(dv2);
    out.push_back({t, ex.mean, ex.se, ev.mean, ev.se});
  }
  return out;
}

OrderFit weak_order_fit(const std::vector<double>& h, const std::vector<double>& errors,
                        double confidence) {
  if (h.size() != errors.size()) throw std::invalid_argument("weak_order_fit: size mismatch");
  if (h.size() < 3) throw std::invalid_argument("weak_order_fit: need at least 3 step sizes");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("weak_order_fit: confidence in (0,1)");
  const std::size_t n = h.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(h[i] > 0.0) || !(errors[i] > 0.0)) {
      throw std::invalid_argument("weak_order_fit: step sizes and errors must be positive");
    }
    x[i] = std::log(h[i]);
    y[i] = std::log(errors[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("weak_order_fit: step sizes must differ");
  OrderFit fit;
  fit.confidence = confidence;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  fit.slope_se = std::sqrt(rss / dof / sxx);
  const boost::math::students_t dist(dof);
  const double q = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
  fit.ci_low = fit.slope - q * fit.slope_se;
  fit.ci_high = fit.slope + q * fit.slope_se;
  return fit;
}

void write_paths_csv(std::ostream& os, const std::vector<std::vector<PathState>>& paths,
                     std::uint64_t first_id) {
  os << std::setprecision(17);
  Eigen::Index dim = 0;
  for (const auto& p : paths) {
    if (!p.empty()) {
      dim = p.front().z.size();
      break;
    }
  }
  os << "path_id,t";
  for (Eigen::Index k = 0; k < dim; ++k) os << ",coord_" << k;
  os << '\n';
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (const PathState& s : paths[i]) {
      os << first_id + i << ',' << s.t;
      for (Eigen::Index k = 0; k < s.z.size(); ++k) os << ',' << s.z[k];
      os << '\n';
    }
  }
}

void write_summary_csv(std::ostream& os, const EnsembleSummary& summary) {
  os << std::setprecision(17);
  os << "t,count,observable,mean,mean_se,variance,variance_se\n";
  for (const MomentSlice& s : summary.slices) {
    for (Eigen::Index k = 0; k < s.mean.size(); ++k) {
      os << s.t << ',' << s.count << ',' << summary.observables[static_cast<std::size_t>(k)] << ','
         << s.mean[k] << ',' << s.mean_se[k] << ',' << s.covariance(k, k) << ','
         << s.covariance_se(k, k) << '\n';
    }
  }
}

}  // namespace stochacc
