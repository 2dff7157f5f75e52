#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rieszheat/errors.hpp"
#include "rieszheat/gaussian_oracle.hpp"
#include "rieszheat/moments.hpp"
#include "rieszheat/parallel.hpp"

using namespace rieszheat;

TEST_CASE("increment moment basics") {
  const Eigen::ArrayXXd a = Eigen::ArrayXXd::Random(200, 2);
  const IncrementProbe same = increment_moment(a, a, 2.0);
  CHECK(same.estimate == 0.0);
  CHECK(same.std_error == 0.0);
  CHECK(same.n_paths == 200);
  CHECK_THROWS_AS(increment_moment(a.topRows(99), a.topRows(99), 2.0), DomainError);
  CHECK_THROWS_AS(increment_moment(a, a, 1.5), DomainError);

  Eigen::ArrayXXd b = a;
  b.col(0) += 3.0;
  b.col(1) += 4.0;
  CHECK(increment_moment(b, a, 2.0).estimate == doctest::Approx(25.0));
  CHECK(increment_moment(b, a, 4.0).estimate == doctest::Approx(625.0));
}

TEST_CASE("standard error follows the CLT rate") {
  std::vector<double> small, large;
  RngStream rng(1, 0);
  for (int i = 0; i < 8000; ++i) {
    const double g = rng.gaussian();
    if (i < 2000) small.push_back(g * g);
    large.push_back(g * g);
  }
  const double ratio = moment_from_path_values(large, 2.0, 1.0).std_error / moment_from_path_values(small, 2.0, 1.0).std_error;
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("exponent fit") {
  std::vector<double> lags, m;
  for (int j = 0; j < 6; ++j) {
    lags.push_back(0.01 * std::pow(2.0, j));
    m.push_back(std::pow(lags.back(), 1.5));
  }
  const ExponentFit f = holder_exponent_fit(lags, m);
  CHECK(f.slope == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(f.slope_std_error < 1e-12);

  std::vector<double> bad = m;
  bad[3] = 0.0;
  try {
    holder_exponent_fit(lags, bad);
    FAIL("no throw");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("0.08") != std::string::npos);
  }
  CHECK_THROWS_AS(holder_exponent_fit({1, 2, 4, 8}, {1, 2, 3, 4}), DomainError);
  CHECK_THROWS_AS(holder_exponent_fit({1, 2, 4, 8, 16}, {1, 2, 3, 4, 5}), DomainError);
}

TEST_CASE("second moment of a spatial increment matches 2 (Var - Cov)") {
  const KernelParams p(1, 0.5);
  const GridSpec g(1, 128, 4.0, default_dt(128, 4.0));
  const long n = 1000;
  const long lag = 8;
  const long steps = steps_for_horizon(g, 1.0);
  struct Pair {
    double x, y;
  };
  const auto v = parallel_map<Pair>(n, default_worker_count(), [&](std::size_t i) {
    PathIntegrator path(g, p, Coefficients::additive(1));
    path.reset(RngStream(31, i));
    path.advance(steps);
    return Pair{path.value_at(64 + lag, 0), path.value_at(64, 0)};
  });
  Eigen::ArrayXXd at_x(n, 1), at_y(n, 1);
  for (long i = 0; i < n; ++i) {
    at_x(i, 0) = v[i].x;
    at_y(i, 0) = v[i].y;
  }
  const IncrementProbe probe = increment_moment(at_x, at_y, 2.0, lag * g.spacing());
  Eigen::VectorXd x(1), y(1);
  x << lag * g.spacing();
  y << 0.0;
  const Eigen::Matrix2d c = cov_pair(PairGeometry(1.0, 1.0, y, x), p);
  const double oracle = c(0, 0) + c(1, 1) - 2.0 * c(0, 1);
  CHECK(std::abs(probe.estimate - oracle) < 4.0 * probe.std_error);
}

TEST_CASE("exponent study refuses lags beyond the probe region") {
  const KernelParams p(1, 0.5);
  ExponentStudyConfig cfg{GridSpec(1, 128, 4.0, 4.0 * std::pow(4.0 / 128, 2)), p, Coefficients::additive(1)};
  cfg.n_paths = 200;
  CHECK_THROWS_AS(run_exponent_study(cfg), ConfigError);
}

TEST_CASE("multiplicative exponents stay below the additive envelope") {
  // compared with the additive study on the same lattice and noise, so the
  // lattice bias of the discrete slopes cancels
  const KernelParams p(1, 0.5);
  const double h = 4.0 / 512;
  ExponentStudyConfig cfg{GridSpec(1, 512, 4.0, 4.0 * h * h), p, Coefficients::additive(1)};
  cfg.n_paths = 300;
  cfg.seed = 5;
  cfg.workers = default_worker_count();
  const ExponentStudy add = run_exponent_study(cfg);
  cfg.coeffs = Coefficients::multiplicative_demo(1);
  const ExponentStudy mult = run_exponent_study(cfg);
  CHECK(mult.spatial_fit.slope <= add.spatial_fit.slope + 2.0 * std::hypot(add.spatial_mc_std_error, mult.spatial_mc_std_error));
  CHECK(mult.temporal_fit.slope <=
        add.temporal_fit.slope + 2.0 * std::hypot(add.temporal_mc_std_error, mult.temporal_mc_std_error));
  CHECK(mult.spatial.size() == 6);
  CHECK(mult.temporal.size() == 6);
}
