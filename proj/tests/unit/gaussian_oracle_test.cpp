#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "rieszheat/errors.hpp"
#include "rieszheat/gaussian_oracle.hpp"

using namespace rieszheat;

namespace {

Eigen::VectorXd e1(int k, double a) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
  v(0) = a;
  return v;
}

/// Density of N(0, cov) in R^n at z, written out directly.
double gaussian_density(const Eigen::MatrixXd& cov, const Eigen::VectorXd& z) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const double quad = z.dot(ldlt.solve(z));
  return std::exp(-0.5 * quad) / std::sqrt(std::pow(2.0 * oracle::kPi, z.size()) * cov.determinant());
}

}  // namespace

TEST_CASE("pair geometry") {
  CHECK_THROWS_AS(PairGeometry(0.5, 0.5, e1(1, 0.2), e1(1, 0.2)), DomainError);
  CHECK_THROWS_AS(PairGeometry(0.6, 0.5, e1(1, 0.0), e1(1, 0.2)), DomainError);
  CHECK_THROWS_AS(PairGeometry(0.0, 0.5, e1(1, 0.0), e1(1, 0.2)), DomainError);
  const PairGeometry g(0.25, 1.25, e1(1, 0.0), e1(1, 0.16));
  CHECK(g.delta_mod(0.5) == doctest::Approx(1.0 + std::pow(0.16, 1.5)));
}

TEST_CASE("covariance of a pair") {
  const KernelParams p(1, 0.5);
  // identical points: rank one with both entries the variance rate
  Eigen::Matrix2d same;
  {
    // PairGeometry refuses identical points, so approach them
    same = cov_pair(PairGeometry(1.0, 1.0, e1(1, 0.0), e1(1, 1e-12)), p);
  }
  CHECK(same(0, 0) == doctest::Approx(variance_rate(1.0, p)).epsilon(1e-6));
  CHECK(same(0, 1) == doctest::Approx(variance_rate(1.0, p)).epsilon(1e-6));
  CHECK(std::abs(same.determinant()) < 1e-6 * same(0, 0) * same(0, 0));

  for (double s : {0.3, 1.0}) {
    for (double tau : {0.0, 0.2}) {
      for (double h : {0.0, 0.1, 0.8}) {
        if (tau == 0.0 && h == 0.0) continue;
        const Eigen::Matrix2d c = cov_pair(PairGeometry(s, s + tau, e1(1, 0.0), e1(1, h)), p);
        CHECK(c(0, 0) == doctest::Approx(variance_rate(s, p)).epsilon(1e-6));
        CHECK(c(1, 1) == doctest::Approx(variance_rate(s + tau, p)).epsilon(1e-6));
        CHECK(c(0, 1) == doctest::Approx(oracle::covariance(1, 0.5, s, s + tau, h)).epsilon(1e-5));
        CHECK(c(0, 1) == c(1, 0));
        CHECK(c.determinant() >= 0.0);
      }
    }
  }

  // rotation invariance in k = 2
  const KernelParams p2(2, 0.5);
  const Eigen::Matrix2d a = cov_pair(PairGeometry(0.5, 0.7, Eigen::Vector2d(0.1, 0.1), Eigen::Vector2d(0.4, 0.5)), p2);
  const Eigen::Matrix2d b = cov_pair(PairGeometry(0.5, 0.7, Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(-0.5, 0.0)), p2);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(a(0, 1) == doctest::Approx(oracle::covariance(2, 0.5, 0.5, 0.7, 0.5)).epsilon(1e-5));
}

TEST_CASE("Z covariance") {
  const KernelParams p(1, 0.5);
  for (double tau : {1e-4, 1e-2, 0.3}) {
    for (double h : {1e-2, 0.1, 0.5}) {
      const PairGeometry g(0.5, 0.5 + tau, e1(1, 0.0), e1(1, h));
      const ZCovariance z = malliavin_matrix_gaussian(g, p, 2);
      CHECK(z.lambda_min >= 0.0);
      CHECK(z.lambda_min <= 0.5 * z.blocks.trace());
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z.full());
      CHECK(es.eigenvalues().minCoeff() == doctest::Approx(z.lambda_min).epsilon(1e-8));
      CHECK(z.full().rows() == 4);

      const Eigen::Matrix2d pushed = push_forward(cov_pair(g, p));
      // push-forward of cov_pair loses digits when Delta is small, so compare
      // at the accuracy it retains
      const double scale = cov_pair(g, p).cwiseAbs().maxCoeff();
      CHECK((pushed - z.blocks).cwiseAbs().maxCoeff() < 1e-6 * scale);
    }
  }
  // closed-form push-forward
  Eigen::Matrix2d m;
  m << 2.0, 1.5, 1.5, 3.0;
  Eigen::Matrix2d expected;
  expected << 2.0, -0.5, -0.5, 2.0;
  CHECK((push_forward(m) - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(lambda_min_2x2(expected) == doctest::Approx(1.5).epsilon(1e-15));

  // far apart at equal times: Var(Z1) = Var, Var(Z2) = 2 (Var - Cov)
  const PairGeometry far(0.5, 0.5, e1(1, 0.0), e1(1, 0.5));
  const ZCovariance z = malliavin_matrix_gaussian(far, p);
  const Eigen::Matrix2d c = cov_pair(far, p);
  CHECK(z.blocks(0, 0) == doctest::Approx(c(0, 0)).epsilon(1e-8));
  CHECK(z.blocks(1, 1) == doctest::Approx(2.0 * (c(0, 0) - c(0, 1))).epsilon(1e-6));
}

TEST_CASE("eigenvalue ratio sweep") {
  const KernelParams p(1, 0.5);
  const auto pairs = canonical_pair_grid(0);
  CHECK(pairs.size() == 81);
  CHECK(canonical_pair_grid(1).size() == 289);
  for (int d : {1, 2}) {
    const EigenSweep a = eigen_sweep(pairs, p, d);
    const EigenSweep b = eigen_sweep(canonical_pair_grid(1), p, d);
    CHECK(a.min_ratio > 0.0);
    CHECK(std::abs(b.min_ratio - a.min_ratio) < 0.05 * a.min_ratio);
    CHECK(a.max_eigen_discrepancy < 1e-8);
  }
}

TEST_CASE("density envelope") {
  const KernelParams p(1, 0.5);
  const PairGeometry g(0.5, 0.6, e1(1, 0.0), e1(1, 0.3));
  const double delta = g.delta_mod(0.5);
  const Eigen::Matrix2d c = cov_pair(g, p);
  Eigen::VectorXd z1(1), z2(1);
  z1 << 0.4;
  z2 << 0.4;
  const DensityRatio at = density_envelope_check(g, z1, z2, 2.0, p);
  CHECK(at.envelope == doctest::Approx(std::pow(delta, -0.5)));
  CHECK(at.ratio == doctest::Approx(at.density * std::sqrt(delta)));
  CHECK(at.density == doctest::Approx(gaussian_density(c, Eigen::Vector2d(0.4, 0.4))).epsilon(1e-10));

  z2 << -1.1;
  const DensityRatio off = density_envelope_check(g, z1, z2, 4.0, p);
  CHECK(off.density == doctest::Approx(gaussian_density(c, Eigen::Vector2d(0.4, -1.1))).epsilon(1e-10));
  const double bracket = std::min(delta * delta / (1.5 * 1.5), 1.0);
  CHECK(off.envelope == doctest::Approx(std::pow(delta, -0.5) * std::pow(bracket, 2.0)));

  const DensityRatio mean = density_envelope_check(g, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 1.0, p);
  CHECK(mean.density <= std::pow(2.0 * oracle::kPi, -1.0) / std::sqrt(c.determinant()) * (1.0 + 1e-12));

  // d = 2 density is the product of two independent component densities
  Eigen::VectorXd a(2), b(2);
  a << 0.1, -0.2;
  b << 0.3, 0.0;
  const DensityRatio two = density_envelope_check(g, a, b, 1.0, p);
  CHECK(two.density == doctest::Approx(gaussian_density(c, Eigen::Vector2d(0.1, 0.3)) *
                                       gaussian_density(c, Eigen::Vector2d(-0.2, 0.0)))
                           .epsilon(1e-10));
}

TEST_CASE("envelope sweep is finite and refinement-stable") {
  const KernelParams p(1, 0.5);
  const EnvelopeSweep a = envelope_sweep(p, 4, 25, {1, 2, 4});
  const EnvelopeSweep b = envelope_sweep(p, 7, 49, {1, 2, 4});
  CHECK(a.configurations == 10000);
  for (std::size_t q = 0; q < 3; ++q) {
    CHECK(std::isfinite(a.sup_ratio[q]));
    CHECK(std::abs(b.sup_ratio[q] - a.sup_ratio[q]) < 0.05 * a.sup_ratio[q]);
    CHECK(a.sup_ratio_far[q] <= a.sup_ratio[q]);
  }
}
