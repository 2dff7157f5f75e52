#ifndef RIESZHEAT_KERNEL_HPP
#define RIESZHEAT_KERNEL_HPP

// Heat kernel S(t, x) = (2 pi t)^{-k/2} exp(-|x|^2 / (2t)) on R^k, the Riesz
// covariance |x|^{-beta} with spectral density c_{k,beta} |xi|^{beta-k}, and
// the Green-kernel integral estimates built from them.
//
// Spectral quantities are radial integrals
//   c_{k,beta} w_k int_0^inf rho^{beta-1} [A(rho) + B(rho) (1 - Lambda_k(rho h))] drho
// where w_k is the area of the unit sphere and Lambda_k(q) is the spherical
// average of cos(q theta_1). They are integrated on log-spaced panels over
// [1e-8, 1e8] (linear panels of width pi/h once the angular factor oscillates)
// with analytic tails at both ends.

#include <functional>
#include <limits>

#include <Eigen/Core>

namespace rieszheat {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Spatial dimension k, Riesz exponent beta and the relative quadrature
/// tolerance. Construction enforces 0 < beta < min(2, k) and
/// quad_tol in (0, 1e-2].
class KernelParams {
 public:
  KernelParams(int k, double beta, double quad_tol = 1e-6);

  int k() const { return k_; }
  double beta() const { return beta_; }
  double quad_tol() const { return quad_tol_; }

 private:
  int k_;
  double beta_;
  double quad_tol_;
};

/// Normalization of the Riesz spectral measure: for Schwartz phi, psi
///   int int phi(x) |x-y|^{-beta} psi(y) dx dy
///     = c_{k,beta} int |xi|^{beta-k} F phi(xi) conj(F psi(xi)) dxi.
struct SpectralConstant {
  double c_k_beta;
};

/// Both sides of the identity above for the Gaussian test function
/// exp(-|x|^2 / (2 width^2)); the Fourier side excludes c_{k,beta}.
struct ParsevalSides {
  double direct;
  double fourier;
};

ParsevalSides parseval_sides(const KernelParams& params, double width);

/// c_{k,beta} = direct / fourier at unit width. Computed once per (k, beta)
/// under an initialization guard and cached.
const SpectralConstant& spectral_constant(const KernelParams& params);

/// Surface area of the unit sphere in R^k.
double sphere_area(int k);

/// Lambda_k(q) = Gamma(k/2) (2/q)^{k/2-1} J_{k/2-1}(q); Lambda_k(0) = 1.
double angular_average(int k, double q);

/// 1 - Lambda_k(q), accurate for small q.
double one_minus_angular_average(int k, double q);

double heat_kernel(double t, const Eigen::Ref<const Eigen::VectorXd>& x, const KernelParams& params);

/// int |z|^{-beta} S(t, z) dz = C(k, beta) t^{-beta/2}; C(k, beta) is a
/// cached radial quadrature.
double riesz_convolution(double t, const KernelParams& params);

/// int |S(t, x+z) - S(t, y+z)| dz. Reduces to a 1-D quadrature along x - y.
double kernel_l1_increment(double t, const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y, const KernelParams& params);

/// int |z|^{-beta} |S(t, x+z) - S(t, y+z)| dz by direct quadrature (1-D for
/// k = 1, polar in the plane of {0, x, y} for k = 2, nested radial integral
/// over the orthogonal complement for k >= 3).
double riesz_weighted_increment(double t, const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const KernelParams& params);

/// |S(t,x) - S(t,y)| divided by |x-y| t^{-(k+1)/2} (e^{-|x|^2/(m0 t)} + e^{-|y|^2/(m0 t)}).
double mean_value_bound_ratio(double t, const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& y, double m0,
                              const KernelParams& params);

/// c int_0^s dr int |xi|^{beta-k} e^{-r|xi|^2} |1 - e^{i xi.(x-y)}|^2 dxi.
/// `s` may be kInfinity.
double increment_energy_spatial(double s, const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const KernelParams& params);

/// c int_0^t dr int |xi|^{beta-k} (e^{-(r+delta)|xi|^2/2} - e^{-r|xi|^2/2})^2 dxi.
/// `t` may be kInfinity.
double increment_energy_temporal(double t, double delta, const KernelParams& params);

/// int_0^tau dr int mu(dxi) |F S(r, .)(xi)|^2 = Var u_i(tau, x) in the additive case.
double variance_rate(double tau, const KernelParams& params);

/// Integrand pieces for `riesz_spectral_integral`. `oscillating` may be empty.
struct RadialIntegrand {
  std::function<double(double)> plain;
  std::function<double(double)> oscillating;
};

/// c_{k,beta} w_k int_0^inf rho^{beta-1} [A + B (1 - Lambda_k(rho h))] drho.
/// A and B must decay at least like rho^{-2}.
double riesz_spectral_integral(const KernelParams& params, const RadialIntegrand& integrand,
                               double h);

/// Absolute-value form of a double-integral lemma (k = 1 only): the value and
/// the magnitude of the analytic tail corrections that were added to it.
struct AbsIntegral {
  double value;
  double tail;
};

/// int_0^s dr int int |z-v|^{-beta} |S(r,x-z)-S(r,y-z)| |S(r,x-v)-S(r,y-v)| dz dv, k = 1.
AbsIntegral spatial_increment_abs(double s, double h, const KernelParams& params);

/// int_0^t dr int int |z-v|^{-beta} |S(r+delta,z)-S(r,z)| |S(r+delta,v)-S(r,v)| dz dv, k = 1.
AbsIntegral temporal_increment_abs(double t, double delta, const KernelParams& params);

}  // namespace rieszheat

#endif  // RIESZHEAT_KERNEL_HPP
