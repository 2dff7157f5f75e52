#include "rieszheat/gaussian_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "rieszheat/errors.hpp"
#include "rieszheat/parallel.hpp"

namespace rieszheat {

namespace {

constexpr double kPi = std::numbers::pi;

/// 1 - e^{-a rho^2} without cancellation; a may be infinite.
double one_minus_exp(double a, double r2) { return std::isinf(a) ? 1.0 : -std::expm1(-a * r2); }

/// Cov(u(s, y), u(t, x)) for s <= t with |x - y| = h.
double cross_covariance(double s, double t, double h, const KernelParams& params) {
  const double tau = t - s;
  RadialIntegrand in;
  auto base = [s, tau](double rho) {
    const double r2 = rho * rho;
    return std::exp(-0.5 * tau * r2) * one_minus_exp(s, r2) / r2;
  };
  in.plain = base;
  in.oscillating = [base](double rho) { return -base(rho); };
  return riesz_spectral_integral(params, in, h);
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    v[i] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
  }
  return v;
}

}  // namespace

PairGeometry::PairGeometry(double s, double t, Eigen::VectorXd y, Eigen::VectorXd x)
    : s_(s), t_(t), y_(std::move(y)), x_(std::move(x)) {
  if (!(s > 0.0) || !(t >= s) || !std::isfinite(t)) throw DomainError("PairGeometry: need 0 < s <= t < inf");
  if (y_.size() != x_.size() || y_.size() == 0) throw DomainError("PairGeometry: points differ in dimension");
  if (t_ == s_ && (x_ - y_).norm() == 0.0) throw DomainError("PairGeometry: (s,y) and (t,x) coincide");
}

double PairGeometry::delta_mod(double beta) const {
  return std::pow(t_ - s_, 0.5 * (2.0 - beta)) + std::pow(separation(), 2.0 - beta);
}

Eigen::Matrix2d cov_pair(const PairGeometry& pair, const KernelParams& params) {
  if (pair.x().size() != params.k()) throw DomainError("cov_pair: points must lie in R^k");
  Eigen::Matrix2d c;
  c(0, 0) = cross_covariance(pair.s(), pair.s(), 0.0, params);
  c(1, 1) = cross_covariance(pair.t(), pair.t(), 0.0, params);
  c(0, 1) = c(1, 0) = cross_covariance(pair.s(), pair.t(), pair.separation(), params);
  return c;
}

Eigen::MatrixXd ZCovariance::full() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) m.block(a * d, b * d, d, d) = blocks(a, b) * Eigen::MatrixXd::Identity(d, d);
  }
  return m;
}

double lambda_min_2x2(const Eigen::Matrix2d& m) {
  const double a = m(0, 0);
  const double b = m(1, 1);
  const double c = 0.5 * (m(0, 1) + m(1, 0));
  const double lmax = 0.5 * (a + b) + std::hypot(0.5 * (a - b), c);
  if (lmax <= 0.0) return 0.0;
  return (a * b - c * c) / lmax;
}

Eigen::Matrix2d push_forward(const Eigen::Matrix2d& cov) {
  Eigen::Matrix2d a;
  a << 1.0, 0.0, -1.0, 1.0;
  return a * cov * a.transpose();
}

ZCovariance malliavin_matrix_gaussian(const PairGeometry& pair, const KernelParams& params, int d) {
  if (d < 1) throw DomainError("malliavin_matrix_gaussian: d must be >= 1");
  if (pair.x().size() != params.k()) throw DomainError("malliavin_matrix_gaussian: points must lie in R^k");
  const double s = pair.s();
  const double tau = pair.t() - pair.s();
  const double h = pair.separation();

  RadialIntegrand var_z2;
  var_z2.plain = [s, tau](double rho) {
    const double r2 = rho * rho;
    const double gap = one_minus_exp(0.5 * tau, r2);
    return (one_minus_exp(tau, r2) + one_minus_exp(s, r2) * gap * gap) / r2;
  };
  var_z2.oscillating = [s, tau](double rho) {
    const double r2 = rho * rho;
    return 2.0 * one_minus_exp(s, r2) * std::exp(-0.5 * tau * r2) / r2;
  };
  RadialIntegrand cov_z;
  cov_z.plain = [s, tau](double rho) {
    const double r2 = rho * rho;
    return -one_minus_exp(s, r2) * one_minus_exp(0.5 * tau, r2) / r2;
  };
  cov_z.oscillating = [s, tau](double rho) {
    const double r2 = rho * rho;
    return -one_minus_exp(s, r2) * std::exp(-0.5 * tau * r2) / r2;
  };

  ZCovariance z;
  z.d = d;
  z.blocks(0, 0) = variance_rate(s, params);
  z.blocks(1, 1) = riesz_spectral_integral(params, var_z2, h);
  z.blocks(0, 1) = z.blocks(1, 0) = riesz_spectral_integral(params, cov_z, h);
  z.lambda_min = lambda_min_2x2(z.blocks);
  const double scale = z.blocks.trace();
  if (z.lambda_min < -params.quad_tol() * scale) {
    throw NumericError("malliavin_matrix_gaussian: covariance is indefinite",
                       "lambda_min=" + std::to_string(z.lambda_min));
  }
  z.lambda_min = std::max(z.lambda_min, 0.0);
  return z;
}

DensityRatio density_envelope_check(const PairGeometry& pair, const Eigen::VectorXd& z1, const Eigen::VectorXd& z2,
                                    double p, const ZCovariance& zcov, double beta) {
  const int d = zcov.d;
  if (z1.size() != d || z2.size() != d) throw DomainError("density_envelope_check: z1, z2 must lie in R^d");
  if (!(p >= 1.0)) throw DomainError("density_envelope_check: p must be >= 1");
  // Density of (u(s,y), u(t,x)) at (z1, z2) = density of Z at (z1, z2 - z1):
  // the map has unit Jacobian. Components are independent and identically
  // distributed, each with covariance zcov.blocks.
  Eigen::LLT<Eigen::Matrix2d> llt(zcov.blocks);
  const double det = zcov.blocks.determinant();
  if (llt.info() != Eigen::Success || !(det > 0.0)) {
    throw NumericError("density_envelope_check: singular covariance; enlarge Delta (|t-s| or |x-y|)",
                       "det=" + std::to_string(det));
  }
  double quad = 0.0;
  for (int i = 0; i < d; ++i) {
    const Eigen::Vector2d v(z1(i), z2(i) - z1(i));
    quad += v.dot(llt.solve(v));
  }
  DensityRatio r;
  r.density = std::pow(2.0 * kPi, -d) * std::pow(det, -0.5 * d) * std::exp(-0.5 * quad);
  const double delta = pair.delta_mod(beta);
  const double dist2 = (z1 - z2).squaredNorm();
  const double bracket = dist2 > 0.0 ? std::min(delta * delta / dist2, 1.0) : 1.0;
  r.envelope = std::pow(delta, -0.5 * d) * std::pow(bracket, p / (2.0 * d));
  r.ratio = r.density / r.envelope;
  return r;
}

DensityRatio density_envelope_check(const PairGeometry& pair, const Eigen::VectorXd& z1, const Eigen::VectorXd& z2,
                                    double p, const KernelParams& params) {
  return density_envelope_check(pair, z1, z2, p, malliavin_matrix_gaussian(pair, params, static_cast<int>(z1.size())),
                                params.beta());
}

std::vector<PairGeometry> pair_grid(double s, double tau_lo, double tau_hi, double h_lo, double h_hi, int points,
                                    int k) {
  if (points < 2) throw DomainError("pair_grid: need at least 2 points per axis");
  std::vector<PairGeometry> out;
  for (double tau : log_grid(tau_lo, tau_hi, points)) {
    for (double h : log_grid(h_lo, h_hi, points)) {
      Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
      x(0) = h;
      out.emplace_back(s, s + tau, y, x);
    }
  }
  return out;
}

std::vector<PairGeometry> canonical_pair_grid(int refinement, int k) {
  int points = 9;
  for (int r = 0; r < refinement; ++r) points = 2 * points - 1;
  return pair_grid(0.5, 1e-4, 0.5, 1e-2, 1.0, points, k);
}

EigenSweep eigen_sweep(const std::vector<PairGeometry>& pairs, const KernelParams& params, int d, int workers) {
  if (pairs.empty()) throw DomainError("eigen_sweep: empty pair grid");
  struct Item {
    double ratio;
    double discrepancy;
  };
  auto items = parallel_map<Item>(pairs.size(), workers, [&](std::size_t i) {
    const ZCovariance z = malliavin_matrix_gaussian(pairs[i], params, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(z.full(), Eigen::EigenvaluesOnly);
    const double dense = solver.eigenvalues().minCoeff();
    const double disc = std::abs(dense - z.lambda_min) / std::max(z.blocks.trace(), 1e-300);
    return Item{z.lambda_min / pairs[i].delta_mod(params.beta()), disc};
  });
  EigenSweep out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].ratio < out.min_ratio) {
      out.min_ratio = items[i].ratio;
      out.argmin_tau = pairs[i].t() - pairs[i].s();
      out.argmin_h = pairs[i].separation();
    }
    out.max_ratio = std::max(out.max_ratio, items[i].ratio);
    out.max_eigen_discrepancy = std::max(out.max_eigen_discrepancy, items[i].discrepancy);
  }
  return out;
}

EnvelopeSweep envelope_sweep(const KernelParams& params, int pair_points, int z_points,
                             const std::vector<double>& orders, int workers) {
  if (z_points < 2) throw DomainError("envelope_sweep: need at least 2 z points per axis");
  const auto pairs = pair_grid(0.5, 0.05, 0.5, 0.1, 1.0, pair_points, params.k());
  const auto zcovs = parallel_map<ZCovariance>(pairs.size(), workers,
                                               [&](std::size_t i) { return malliavin_matrix_gaussian(pairs[i], params, 1); });
  EnvelopeSweep out;
  out.orders = orders;
  out.sup_ratio.assign(orders.size(), 0.0);
  out.sup_ratio_far.assign(orders.size(), 0.0);
  Eigen::VectorXd z1(1), z2(1);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double delta = pairs[i].delta_mod(params.beta());
    for (int a = 0; a < z_points; ++a) {
      for (int b = 0; b < z_points; ++b) {
        z1(0) = -2.0 + 4.0 * a / (z_points - 1);
        z2(0) = -2.0 + 4.0 * b / (z_points - 1);
        ++out.configurations;
        const bool far = std::abs(z1(0) - z2(0)) > delta;
        for (std::size_t q = 0; q < orders.size(); ++q) {
          const double r = density_envelope_check(pairs[i], z1, z2, orders[q], zcovs[i], params.beta()).ratio;
          out.sup_ratio[q] = std::max(out.sup_ratio[q], r);
          if (far) out.sup_ratio_far[q] = std::max(out.sup_ratio_far[q], r);
        }
      }
    }
  }
  return out;
}

}  // namespace rieszheat
