#ifndef RIESZHEAT_GAUSSIAN_ORACLE_HPP
#define RIESZHEAT_GAUSSIAN_ORACLE_HPP

// Exact covariance structure of the additive-noise solution, its smallest
// eigenvalue in the coordinates Z = (u(s,y), u(t,x) - u(s,y)), and the ratio of
// the joint density to the envelope
//   Delta^{-d/2} [Delta^2 / |z1 - z2|^2 ^ 1]^{p/(2d)},
//   Delta = |t-s|^{(2-beta)/2} + |x-y|^{2-beta}.

#include <vector>

#include <Eigen/Dense>

#include "rieszheat/kernel.hpp"

namespace rieszheat {

class PairGeometry {
 public:
  /// Requires 0 < s <= t and (s,y) != (t,x).
  PairGeometry(double s, double t, Eigen::VectorXd y, Eigen::VectorXd x);

  double s() const { return s_; }
  double t() const { return t_; }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXd& x() const { return x_; }
  double separation() const { return (x_ - y_).norm(); }
  double delta_mod(double beta) const;

 private:
  double s_;
  double t_;
  Eigen::VectorXd y_;
  Eigen::VectorXd x_;
};

/// 2x2 covariance of (u_1(s,y), u_1(t,x)). Variances and the cross term all
/// come from the radial form of
///   c int_0^s dr int |xi|^{beta-k} e^{-((t-r)+(s-r))|xi|^2/2} cos(xi.(x-y)) dxi.
Eigen::Matrix2d cov_pair(const PairGeometry& pair, const KernelParams& params);

struct ZCovariance {
  Eigen::Matrix2d blocks;  // per-component covariance of (Z1, Z2)
  int d = 1;
  double lambda_min = 0.0;

  /// Full 2d x 2d matrix blocks (x) I_d, ordered (Z1 components, Z2 components).
  Eigen::MatrixXd full() const;
};

/// Smallest eigenvalue of a symmetric 2x2 matrix as det / lambda_max, which
/// stays accurate when the matrix is nearly singular.
double lambda_min_2x2(const Eigen::Matrix2d& m);

/// Covariance of Z, computed from integrands written directly for
/// Var(Z2) and Cov(Z1, Z2) so no cancellation occurs for small Delta; equals
/// the push-forward of cov_pair under (a, b) -> (a, b - a).
ZCovariance malliavin_matrix_gaussian(const PairGeometry& pair, const KernelParams& params, int d = 1);

/// Push-forward of a (u(s,y), u(t,x)) covariance to Z coordinates.
Eigen::Matrix2d push_forward(const Eigen::Matrix2d& cov);

struct DensityRatio {
  double density = 0.0;
  double envelope = 0.0;
  double ratio = 0.0;
};

/// Joint Gaussian density of (u(s,y), u(t,x)) in R^{2d} at (z1, z2) over the
/// envelope with c = 1. Throws NumericError when the covariance is singular.
DensityRatio density_envelope_check(const PairGeometry& pair, const Eigen::VectorXd& z1, const Eigen::VectorXd& z2,
                                    double p, const ZCovariance& zcov, double beta);
DensityRatio density_envelope_check(const PairGeometry& pair, const Eigen::VectorXd& z1, const Eigen::VectorXd& z2,
                                    double p, const KernelParams& params);

/// Pair family used by the eigenvalue and envelope sweeps (k = 1 unless
/// `k` is given): s fixed, tau = t - s and h = |x - y| log-spaced over
/// [tau_lo, tau_hi] x [h_lo, h_hi] with `points` values per axis; x - y lies
/// along the first axis. Refinement uses 2 points - 1, nesting the grid.
std::vector<PairGeometry> pair_grid(double s, double tau_lo, double tau_hi, double h_lo, double h_hi, int points,
                                    int k = 1);

/// Eigenvalue sweep default: s = 0.5, tau in [1e-4, 0.5], h in [1e-2, 1].
std::vector<PairGeometry> canonical_pair_grid(int refinement, int k = 1);

struct EigenSweep {
  double min_ratio = 0.0;  // min lambda_min / Delta
  double max_ratio = 0.0;
  double argmin_tau = 0.0;
  double argmin_h = 0.0;
  double max_eigen_discrepancy = 0.0;  // closed form vs dense eigensolver, relative
};

EigenSweep eigen_sweep(const std::vector<PairGeometry>& pairs, const KernelParams& params, int d, int workers = 1);

struct EnvelopeSweep {
  std::vector<double> orders;          // p values
  std::vector<double> sup_ratio;       // sup over all configurations, per p
  std::vector<double> sup_ratio_far;   // sup over configurations with |z1 - z2| > Delta, per p
  long configurations = 0;
};

/// Envelope sweep for d = 1: pairs from `pair_grid(0.5, 0.05, 0.5, 0.1, 1, pair_points)`
/// and (z1, z2) on a `z_points`^2 lattice in [-2, 2]^2.
EnvelopeSweep envelope_sweep(const KernelParams& params, int pair_points, int z_points,
                             const std::vector<double>& orders, int workers = 1);

}  // namespace rieszheat

#endif  // RIESZHEAT_GAUSSIAN_ORACLE_HPP
