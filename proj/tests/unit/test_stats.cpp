#include <cmath>
#include <sstream>

#include "doctest.h"
#include "stochacc/models.hpp"
#include "stochacc/stats.hpp"
#include "test_support.hpp"

using namespace stochacc;

namespace {

std::vector<double> normals(std::uint64_t seed, std::size_t n) {
  std::vector<double> out;
  const WienerDriver w(seed, 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(w.standard_normal(i, 0, 0));
  return out;
}

}  // namespace

TEST_CASE("identical paths have zero variance") {
  std::vector<PathState> p = {{Eigen::Vector2d(1, 2), 0.0, 0}, {Eigen::Vector2d(3, 4), 0.5, 1}};
  const EnsembleSummary s = estimate_moments({p, p, p}, {}, {0.0, 0.5});
  REQUIRE(s.slices.size() == 2);
  CHECK(s.slices[1].mean == Vector(Eigen::Vector2d(3, 4)));
  CHECK(s.slices[1].covariance.norm() == 0.0);
  CHECK(s.slices[1].count == 3);
  CHECK_THROWS_AS(estimate_moments({p}, {}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(estimate_moments({p, p}, {}, {0.25}), std::invalid_argument);
}

TEST_CASE("observables") {
  std::vector<std::vector<PathState>> paths;
  for (int i = 0; i < 4; ++i) paths.push_back({{Eigen::Vector2d(i, 1), 0.0, 0}});
  const EnsembleSummary s = estimate_moments(paths, {[](const Vector& z) { return z[0] * z[0]; }}, {0.0});
  CHECK(s.observables.size() == 1);
  CHECK(s.slices[0].mean[0] == doctest::Approx(3.5));
  CHECK(s.slices[0].covariance(0, 0) == doctest::Approx((12.25 + 6.25 + 0.25 + 30.25) / 3.0));
}

TEST_CASE("standard errors") {
  const auto x = normals(1, 40000);
  const ScalarEstimate m = estimate_mean(x);
  CHECK(std::abs(m.mean) <= 3.0 * m.se);
  CHECK(m.se == doctest::Approx(1.0 / std::sqrt(40000.0)).epsilon(0.2));
  const ScalarEstimate v = estimate_variance(x);
  CHECK(std::abs(v.mean - 1.0) <= 3.0 * v.se);
  CHECK(v.se == doctest::Approx(std::sqrt(2.0 / 40000.0)).epsilon(0.25));

  // Quadrupling N halves the standard error.
  const auto y = normals(2, 10000);
  CHECK(estimate_mean(y).se / m.se == doctest::Approx(2.0).epsilon(0.2));

  // Split halves agree with the full estimate within sqrt(2) +- 20%.
  const std::vector<double> a(x.begin(), x.begin() + 20000), b(x.begin() + 20000, x.end());
  for (const auto* half : {&a, &b}) {
    CHECK(estimate_mean(*half).se / m.se == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
  }
  CHECK_THROWS_AS(estimate_mean({1.0}), std::invalid_argument);
}

TEST_CASE("dispersion curves") {
  PulsePlasmaConfig cfg;
  const LangevinModel pulse = example1_model(cfg);
  const WienerDriver w(4, 3);
  const Vector za = testing::random_point(1, 0, 6), zb = testing::random_point(1, 1, 6);
  std::vector<PairRun> sync, same;
  for (std::uint64_t i = 0; i < 50; ++i) {
    sync.push_back(integrate_pair(pulse, za, zb, 2.0, 0.1, w, i));
    same.push_back(integrate_pair(pulse, za, za, 2.0, 0.1, w, i));
  }
  const auto d = dispersion_curve(sync, {0.0, 1.0, 2.0});
  const double dv0 = (za - zb).tail(3).squaredNorm();
  for (const DispersionPoint& p : d) {
    CHECK(std::abs(p.dv2 - dv0) < 1e-12);
    CHECK(std::abs(p.dx2 - ((za - zb).head(3) + p.t * (za - zb).tail(3)).squaredNorm()) < 1e-11);
  }
  for (const DispersionPoint& p : dispersion_curve(same, {0.0, 2.0})) {
    CHECK(p.dx2 == 0.0);
    CHECK(p.dv2 == 0.0);
  }

  SUBCASE("rotated channels spread pairs") {
    const LangevinModel rot = counterexample_model(counterexample_x1(cfg));
    const WienerDriver w6(4, 6);
    std::vector<PairRun> pairs;
    Vector zc = za;
    zc[0] += 1.0;
    for (std::uint64_t i = 0; i < 4000; ++i) pairs.push_back(integrate_pair(rot, za, zc, 4.0, 0.1, w6, i));
    const auto c = dispersion_curve(pairs, {1.0, 2.0, 3.0, 4.0});
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i].dv2 > c[i - 1].dv2);
    std::vector<double> growth;
    for (const PairRun& p : pairs) {
      growth.push_back((p.first.back().z - p.second.back().z).tail(3).squaredNorm() -
                      (p.first[10].z - p.second[10].z).tail(3).squaredNorm());
    }
    const ScalarEstimate s = estimate_mean(growth);
    CHECK(s.mean >= 5.0 * s.se);
  }

  std::vector<PairRun> bad = {sync[0], {sync[1].first, {}}};
  CHECK_THROWS_AS(dispersion_curve(bad, {0.0}), std::invalid_argument);
}

TEST_CASE("order fits") {
  const std::vector<double> h = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> e;
  for (double x : h) e.push_back(3.0 * x * x);
  const OrderFit exact = weak_order_fit(h, e);
  CHECK(exact.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(exact.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(exact.slope_se < 1e-12);

  std::vector<double> noisy = {0.11, 0.048, 0.026, 0.0124};
  const OrderFit f = weak_order_fit(h, noisy);
  CHECK(f.ci_low < f.slope);
  CHECK(f.ci_high > f.slope);
  // t quantile with 2 degrees of freedom at 95%: 4.302653.
  CHECK((f.ci_high - f.slope) / f.slope_se == doctest::Approx(4.302653).epsilon(1e-6));

  CHECK_THROWS_AS(weak_order_fit({0.1, 0.05}, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(weak_order_fit(h, {1.0, 0.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(weak_order_fit({0.1, -0.05, 0.02}, {1.0, 0.5, 0.2}), std::invalid_argument);
}

TEST_CASE("csv writers") {
  std::vector<std::vector<PathState>> paths = {{{Eigen::Vector2d(1, 2), 0.0, 0}, {Eigen::Vector2d(0.5, 0.25), 0.1, 1}},
                                               {{Eigen::Vector2d(3, 4), 0.0, 0}, {Eigen::Vector2d(1.5, 2.5), 0.1, 1}}};
  std::ostringstream os;
  write_paths_csv(os, paths, 7);
  CHECK(os.str() == "path_id,t,coord_0,coord_1\n7,0,1,2\n7,0.10000000000000001,0.5,0.25\n8,0,3,4\n8,0.10000000000000001,1.5,2.5\n");
  std::ostringstream ss;
  write_summary_csv(ss, estimate_moments(paths, {}, {0.1}));
  std::istringstream in(ss.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,count,observable,mean,mean_se,variance,variance_se");
  std::getline(in, line);
  CHECK(line.rfind("0.10000000000000001,2,coord_0,1,", 0) == 0);
}
