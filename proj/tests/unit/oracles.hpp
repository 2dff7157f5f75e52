#ifndef RIESZHEAT_TESTS_ORACLES_HPP
#define RIESZHEAT_TESTS_ORACLES_HPP

// Closed forms and independent quadratures used as test oracles. They work
// in physical space (Gaussian moments of |W|^{-beta}) while the library
// works on the Fourier side, so agreement is a genuine cross-check.

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>

namespace oracle {

using boost::math::tgamma;
constexpr double kPi = std::numbers::pi;

/// E|W|^{-beta} for W ~ N(0, I_k).
inline double gaussian_negative_moment(int k, double beta) {
  return std::pow(2.0, -0.5 * beta) * tgamma(0.5 * (k - beta)) / tgamma(0.5 * k);
}

/// E|h e1 + W|^{-beta} for W ~ N(0, var I_k).
inline double shifted_negative_moment(int k, double beta, double h, double var) {
  return std::pow(var, -0.5 * beta) * gaussian_negative_moment(k, beta) *
         boost::math::hypergeometric_1F1(0.5 * beta, 0.5 * k, -h * h / (2.0 * var));
}

/// c_{k,beta} for the unnormalized Fourier transform.
inline double riesz_constant(int k, double beta) {
  return std::pow(2.0, -beta) * std::pow(kPi, -0.5 * k) * tgamma(0.5 * (k - beta)) / tgamma(0.5 * beta);
}

inline double riesz_convolution(int k, double beta, double t) {
  return gaussian_negative_moment(k, beta) * std::pow(t, -0.5 * beta);
}

/// Var u(tau, x) = int_0^tau E|W_{2r}|^{-beta} dr.
inline double variance_rate(int k, double beta, double tau) {
  return gaussian_negative_moment(k, beta) * std::pow(2.0, -0.5 * beta) * std::pow(tau, 1.0 - 0.5 * beta) /
         (1.0 - 0.5 * beta);
}

/// Spatial quadratic form at s = inf: (G * |x|^{-beta})(0) - (G * |x|^{-beta})(h)
/// twice over, with G the Green function of -Laplacian.
inline double energy_spatial_inf(int k, double beta, double h) {
  return 2.0 * std::pow(h, 2.0 - beta) / ((2.0 - beta) * (k - beta));
}

inline double energy_temporal_inf(int k, double beta, double delta) {
  return gaussian_negative_moment(k, beta) * std::pow(2.0, -0.5 * beta) * (std::pow(2.0, 0.5 * beta) - 1.0) *
         std::pow(delta, 1.0 - 0.5 * beta) / (1.0 - 0.5 * beta);
}

/// Spatial quadratic form at finite s: int_0^s 2 (g(0, 2r) - g(h, 2r)) dr.
inline double energy_spatial(int k, double beta, double s, double h) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [&](double r) {
    if (r <= 0.0) return 0.0;
    return 2.0 * (shifted_negative_moment(k, beta, 0.0, 2.0 * r) - shifted_negative_moment(k, beta, h, 2.0 * r));
  };
  return ts.integrate(f, 0.0, s);
}

/// Cov(u(s, y), u(t, x)) = int_0^s E|h + W|^{-beta} dr, W ~ N(0, (t-r)+(s-r)).
inline double covariance(int k, double beta, double s, double t, double h) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [&](double r) {
    const double var = (t - r) + (s - r);
    return var <= 0.0 ? 0.0 : shifted_negative_moment(k, beta, h, var);
  };
  return ts.integrate(f, 0.0, s);
}

/// int |S(t, z - h) - S(t, z)| dz in any dimension.
inline double l1_increment(double t, double h) { return 2.0 * std::erf(h / (2.0 * std::sqrt(2.0 * t))); }

/// 2 (2 pi)^{-1/2} int_0^inf z^{-beta} e^{-z^2/2} dz by quadrature (k = 1).
inline double riesz_convolution_quadrature(double beta) {
  boost::math::quadrature::exp_sinh<double> es;
  return 2.0 / std::sqrt(2.0 * kPi) * es.integrate([beta](double z) { return std::pow(z, -beta) * std::exp(-0.5 * z * z); });
}

}  // namespace oracle

#endif  // RIESZHEAT_TESTS_ORACLES_HPP
