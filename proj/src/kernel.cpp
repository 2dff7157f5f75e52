#include "rieszheat/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "rieszheat/errors.hpp"
#include "rieszheat/quadrature.hpp"

namespace rieszheat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRhoLo = 1e-8;
constexpr double kRhoHi = 1e8;
constexpr double kPanelsPerDecade = 2.0;
// Linear panels are used for this many half-periods of the angular factor
// before switching to the first-order asymptotic tail.
constexpr int kOscillationHalfPeriods = 400;
// Gaussian truncation radius (in standard deviations) for direct-space quadrature.
constexpr double kGaussCut = 12.0;
constexpr double kConstantTol = 1e-11;

void require_dim(const Eigen::Ref<const Eigen::VectorXd>& v, const KernelParams& p, const char* what) {
  if (v.size() != p.k()) {
    throw DomainError(std::string(what) + ": point has dimension " + std::to_string(v.size()) +
                      ", expected k = " + std::to_string(p.k()));
  }
}

void require_time(double t, const char* what, bool allow_zero) {
  if (std::isnan(t) || t < 0.0 || (!allow_zero && t == 0.0)) {
    throw DomainError(std::string(what) + ": time argument out of range: " + std::to_string(t));
  }
}

double gaussian_pdf(double z, double var) {
  return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * kPi * var);
}

/// Integral of f over consecutive pieces delimited by sorted, deduplicated
/// breakpoints inside [lo, hi].
template <class F>
quad::Estimate integrate_pieces(F&& f, std::vector<double> points, double lo, double hi, double tol) {
  points.push_back(lo);
  points.push_back(hi);
  std::sort(points.begin(), points.end());
  std::vector<double> edges;
  for (double p : points) {
    if (p < lo || p > hi) continue;
    if (edges.empty() || p > edges.back()) edges.push_back(p);
  }
  return quad::gauss_kronrod_pieces(f, edges, tol);
}

/// int_0^inf r^{power} f(r) dr for f smooth at 0 and negligible beyond
/// `cutoff` scales; `scale` sets where the power-weighted panel ends.
template <class F>
double radial_moment(F&& f, double power, double scale, double cutoff, double tol) {
  quad::Estimate e = quad::power_weighted(f, -power, scale, tol);
  e += quad::log_panels([&](double r) { return std::pow(r, power) * f(r); }, scale, cutoff * scale, 4.0,
                        tol);
  quad::require_converged(e, tol * 10.0, "radial moment");
  return e.value;
}

double riesz_constant(const KernelParams& p) {
  // w_k (2 pi)^{-k/2} int r^{k-1-beta} e^{-r^2/2} dr
  static std::mutex mutex;
  static std::map<std::pair<int, double>, double> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(p.k(), p.beta());
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const double m = radial_moment([](double r) { return std::exp(-0.5 * r * r); }, p.k() - 1 - p.beta(),
                                 1.0, 60.0, kConstantTol);
  const double value = sphere_area(p.k()) * std::pow(2.0 * kPi, -0.5 * p.k()) * m;
  cache.emplace(key, value);
  return value;
}

}  // namespace

KernelParams::KernelParams(int k, double beta, double quad_tol) : k_(k), beta_(beta), quad_tol_(quad_tol) {
  if (k < 1) throw DomainError("KernelParams: k must be >= 1, got " + std::to_string(k));
  if (!(beta > 0.0 && beta < std::min(2.0, static_cast<double>(k)))) {
    throw DomainError("KernelParams: need 0 < beta < min(2, k), got beta = " + std::to_string(beta) +
                      ", k = " + std::to_string(k));
  }
  if (!(quad_tol > 0.0 && quad_tol <= 1e-2)) {
    throw DomainError("KernelParams: quad_tol must lie in (0, 1e-2], got " + std::to_string(quad_tol));
  }
}

double sphere_area(int k) { return 2.0 * std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k); }

double angular_average(int k, double q) {
  q = std::abs(q);
  if (q < 1e-4) return 1.0 - one_minus_angular_average(k, q);
  switch (k) {
    case 1: return std::cos(q);
    case 2: return std::cyl_bessel_j(0.0, q);
    case 3: return std::sin(q) / q;
    default: {
      const double nu = 0.5 * k - 1.0;
      return std::tgamma(0.5 * k) * std::pow(2.0 / q, nu) * std::cyl_bessel_j(nu, q);
    }
  }
}

double one_minus_angular_average(int k, double q) {
  q = std::abs(q);
  if (q < 0.05) {
    const double q2 = q * q;
    const double kk = k;
    return q2 / (2.0 * kk) - q2 * q2 / (8.0 * kk * (kk + 2.0)) +
           q2 * q2 * q2 / (48.0 * kk * (kk + 2.0) * (kk + 4.0));
  }
  if (k == 1) {
    const double s = std::sin(0.5 * q);
    return 2.0 * s * s;
  }
  return 1.0 - angular_average(k, q);
}

ParsevalSides parseval_sides(const KernelParams& p, double width) {
  if (!(width > 0.0)) throw DomainError("parseval_sides: width must be positive");
  const int k = p.k();
  const double beta = p.beta();
  const double a2 = width * width;
  // phi * phi (z) = (pi a^2)^{k/2} exp(-|z|^2 / (4 a^2))
  const double direct_radial = radial_moment([&](double r) { return std::exp(-0.25 * r * r / a2); },
                                             k - 1 - beta, 2.0 * width, 60.0, kConstantTol);
  const double direct = std::pow(kPi * a2, 0.5 * k) * sphere_area(k) * direct_radial;
  // |F phi|^2 = (2 pi a^2)^k exp(-a^2 |xi|^2)
  const double fourier_radial = radial_moment([&](double r) { return std::exp(-a2 * r * r); }, beta - 1.0,
                                              1.0 / width, 60.0, kConstantTol);
  const double fourier = std::pow(2.0 * kPi * a2, k) * sphere_area(k) * fourier_radial;
  return {direct, fourier};
}

const SpectralConstant& spectral_constant(const KernelParams& p) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, SpectralConstant> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(p.k(), p.beta());
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const ParsevalSides sides = parseval_sides(p, 1.0);
  return cache.emplace(key, SpectralConstant{sides.direct / sides.fourier}).first->second;
}

double heat_kernel(double t, const Eigen::Ref<const Eigen::VectorXd>& x, const KernelParams& p) {
  require_time(t, "heat_kernel", false);
  require_dim(x, p, "heat_kernel");
  return std::pow(2.0 * kPi * t, -0.5 * p.k()) * std::exp(-0.5 * x.squaredNorm() / t);
}

double riesz_convolution(double t, const KernelParams& p) {
  require_time(t, "riesz_convolution", false);
  return riesz_constant(p) * std::pow(t, -0.5 * p.beta());
}

double kernel_l1_increment(double t, const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y, const KernelParams& p) {
  require_time(t, "kernel_l1_increment", false);
  require_dim(x, p, "kernel_l1_increment");
  require_dim(y, p, "kernel_l1_increment");
  const double d = (x - y).norm();
  if (d == 0.0) return 0.0;
  // Components orthogonal to x - y integrate to one; what remains is 1-D.
  const double sigma = std::sqrt(t);
  auto f = [&](double z) { return std::abs(gaussian_pdf(z, t) - gaussian_pdf(z - d, t)); };
  const double lo = -kGaussCut * sigma;
  const double hi = d + kGaussCut * sigma;
  const double tol = 0.1 * p.quad_tol();
  auto e = integrate_pieces(f, {kGaussCut * sigma, 0.0, 0.5 * d, d, d - kGaussCut * sigma}, lo, hi, tol);
  quad::require_converged(e, p.quad_tol(), "kernel_l1_increment");
  return std::min(e.value, 2.0);
}

namespace {

/// int_{R^2} (|z|^2 + r2)^{-beta/2} |S_2(t, a+z) - S_2(t, b+z)| dz in polar
/// coordinates about the origin.
double planar_weighted_increment(double t, const Eigen::Vector2d& a, const Eigen::Vector2d& b, double r2,
                                 double beta, double tol) {
  const double var = t;
  const double sigma = std::sqrt(t);
  auto s2 = [&](const Eigen::Vector2d& z) { return std::exp(-0.5 * z.squaredNorm() / var) / (2.0 * kPi * var); };
  const Eigen::Vector2d u = a - b;
  const double c0 = 0.5 * (b.squaredNorm() - a.squaredNorm());
  const double theta_u = std::atan2(u.y(), u.x());
  const double theta_a = std::atan2(-a.y(), -a.x());
  const double theta_b = std::atan2(-b.y(), -b.x());
  auto wrap = [&](double th) {
    // map into [theta_u - pi, theta_u + pi]
    double d = std::remainder(th - theta_u, 2.0 * kPi);
    return theta_u + d;
  };

  auto angular = [&](double rho) {
    auto f = [&](double th) {
      const Eigen::Vector2d z(rho * std::cos(th), rho * std::sin(th));
      return std::abs(s2(a + z) - s2(b + z));
    };
    std::vector<double> pts{theta_u};
    for (double center : {theta_a, theta_b}) {
      pts.push_back(wrap(center));
      for (double m : {1.0, 2.0, 4.0, 8.0}) {
        const double off = m * sigma / std::max(rho, 1e-300);
        if (off < kPi) {
          pts.push_back(wrap(center + off));
          pts.push_back(wrap(center - off));
        }
      }
    }
    const double un = u.norm();
    if (un > 0.0 && std::abs(c0) < rho * un) {
      const double phi = std::acos(c0 / (rho * un));
      pts.push_back(wrap(theta_u + phi));
      pts.push_back(wrap(theta_u - phi));
    }
    return integrate_pieces(f, pts, theta_u - kPi, theta_u + kPi, tol).value;
  };

  auto radial = [&](double rho) {
    const double w = (r2 > 0.0) ? std::pow(rho * rho + r2, -0.5 * beta) : std::pow(rho, -beta);
    return rho * w * angular(rho);
  };

  const double reach = std::max(a.norm(), b.norm()) + kGaussCut * sigma;
  const double first = std::min(sigma, reach);
  quad::Estimate e;
  if (r2 > 0.0) {
    e += quad::gauss_kronrod(radial, 0.0, first, tol);
  } else {
    // rho^{1-beta} near the origin
    e += quad::power_weighted([&](double rho) { return rho * std::pow(rho, -beta) * angular(rho) / std::pow(rho, 1.0 - beta); },
                              beta - 1.0, first, tol);
  }
  std::vector<double> pts;
  for (double r : {a.norm(), b.norm()}) {
    pts.push_back(r);
    for (double m : {1.0, 2.0, 4.0, 8.0}) pts.insert(pts.end(), {r - m * sigma, r + m * sigma});
  }
  e += integrate_pieces(radial, pts, first, reach, tol);
  return e.value;
}

}  // namespace

double riesz_weighted_increment(double t, const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& y, const KernelParams& p) {
  require_time(t, "riesz_weighted_increment", false);
  require_dim(x, p, "riesz_weighted_increment");
  require_dim(y, p, "riesz_weighted_increment");
  const double d = (x - y).norm();
  if (d == 0.0) return 0.0;
  const double beta = p.beta();
  const double tol = 0.1 * p.quad_tol();
  const double sigma = std::sqrt(t);

  if (p.k() == 1) {
    const double xs = x(0);
    const double ys = y(0);
    auto diff = [&](double z) { return std::abs(gaussian_pdf(xs + z, t) - gaussian_pdf(ys + z, t)); };
    const double lo = std::min(-xs, -ys) - kGaussCut * sigma;
    const double hi = std::max(-xs, -ys) + kGaussCut * sigma;
    std::vector<double> pts{-xs, -ys, -0.5 * (xs + ys), -xs - 2.0 * sigma, -xs + 2.0 * sigma,
                            -ys - 2.0 * sigma, -ys + 2.0 * sigma};
    quad::Estimate e;
    auto weighted = [&](double z) { return std::pow(std::abs(z), -beta) * diff(z); };
    if (lo < 0.0 && hi > 0.0) {
      // split at the singularity; pieces touching zero get the power-law rule
      std::vector<double> neg, pos;
      for (double q : pts) (q < 0.0 ? neg : pos).push_back(q);
      std::sort(neg.begin(), neg.end());
      std::sort(pos.begin(), pos.end());
      const double left_inner = neg.empty() || neg.back() <= lo ? lo : std::max(lo, neg.back());
      const double right_inner = pos.empty() || pos.front() >= hi ? hi : std::min(hi, pos.front() > 0.0 ? pos.front() : hi);
      e += quad::power_weighted([&](double u) { return diff(-u); }, beta, -left_inner, tol);
      e += quad::power_weighted([&](double u) { return diff(u); }, beta, right_inner, tol);
      e += integrate_pieces(weighted, neg, lo, left_inner, tol);
      e += integrate_pieces(weighted, pos, right_inner, hi, tol);
    } else {
      e += integrate_pieces(weighted, pts, lo, hi, tol);
    }
    quad::require_converged(e, p.quad_tol(), "riesz_weighted_increment");
    return e.value;
  }

  // Orthonormal basis of a plane containing 0, x and y.
  const Eigen::VectorXd e1 = (y - x) / d;
  Eigen::VectorXd e2 = x - x.dot(e1) * e1;
  if (e2.norm() < 1e-14 * (1.0 + x.norm())) {
    e2 = Eigen::VectorXd::Zero(p.k());
    const int idx = std::abs(e1(0)) < 0.9 ? 0 : 1;
    e2(idx) = 1.0;
    e2 -= e2.dot(e1) * e1;
  }
  e2.normalize();
  const Eigen::Vector2d a(x.dot(e1), x.dot(e2));
  const Eigen::Vector2d b(y.dot(e1), y.dot(e2));

  if (p.k() == 2) return planar_weighted_increment(t, a, b, 0.0, beta, tol);

  // k >= 3: integrate the planar result against the (k-2)-dimensional heat
  // kernel of the orthogonal coordinates, radially.
  const int m = p.k() - 2;
  auto outer = [&](double r) {
    const double density = std::pow(2.0 * kPi * t, -0.5 * m) * std::exp(-0.5 * r * r / t);
    return sphere_area(m) * std::pow(r, m - 1) * density * planar_weighted_increment(t, a, b, r * r, beta, tol);
  };
  quad::Estimate e = integrate_pieces(outer, {0.25 * sigma, sigma, 3.0 * sigma}, 0.0, kGaussCut * sigma, tol * 10.0);
  quad::require_converged(e, p.quad_tol() * 10.0, "riesz_weighted_increment");
  return e.value;
}

double mean_value_bound_ratio(double t, const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& y, double m0, const KernelParams& p) {
  require_time(t, "mean_value_bound_ratio", false);
  require_dim(x, p, "mean_value_bound_ratio");
  require_dim(y, p, "mean_value_bound_ratio");
  if (!(m0 > 0.0)) throw DomainError("mean_value_bound_ratio: m0 must be positive");
  const double d = (x - y).norm();
  if (d == 0.0) return 0.0;
  const double lhs = std::abs(heat_kernel(t, x, p) - heat_kernel(t, y, p));
  const double rhs = d * std::pow(t, -0.5 * (p.k() + 1)) *
                     (std::exp(-x.squaredNorm() / (m0 * t)) + std::exp(-y.squaredNorm() / (m0 * t)));
  return lhs / rhs;
}

double riesz_spectral_integral(const KernelParams& p, const RadialIntegrand& in, double h) {
  const int k = p.k();
  const double beta = p.beta();
  const double tol = 0.1 * p.quad_tol();
  const bool oscillates = static_cast<bool>(in.oscillating) && h > 0.0;

  auto full = [&](double rho) {
    double v = in.plain ? in.plain(rho) : 0.0;
    if (oscillates) v += in.oscillating(rho) * one_minus_angular_average(k, rho * h);
    return std::pow(rho, beta - 1.0) * v;
  };

  quad::Estimate e;
  double analytic = full(kRhoLo) * kRhoLo / beta;  // int_0^lo with the integrand frozen at lo

  if (!oscillates) {
    e += quad::log_panels(full, kRhoLo, kRhoHi, kPanelsPerDecade, tol);
    analytic += full(kRhoHi) * kRhoHi / (2.0 - beta);  // rho^{-2} decay beyond hi
  } else {
    auto smooth = [&](double rho) {
      double v = (in.plain ? in.plain(rho) : 0.0) + in.oscillating(rho);
      return std::pow(rho, beta - 1.0) * v;
    };
    const double phase = 0.25 * (k - 1) * kPi;
    const double start = std::max(kRhoLo, std::min(1.0 / h, kRhoHi));
    const int j0 = std::max(1, static_cast<int>(std::ceil((start * h - phase) / kPi)));
    const int j_end = j0 + kOscillationHalfPeriods;
    const double cutoff = (phase + j_end * kPi) / h;
    const double hi = std::max(kRhoHi, 10.0 * cutoff);

    e += quad::log_panels(full, kRhoLo, start, kPanelsPerDecade, tol);
    std::vector<double> edges{start};
    for (int j = j0; j <= j_end; ++j) edges.push_back((phase + j * kPi) / h);
    e += quad::gauss_kronrod_pieces(full, edges, tol);
    e += quad::log_panels(smooth, cutoff, hi, kPanelsPerDecade, tol);
    analytic += smooth(hi) * hi / (2.0 - beta);

    // Beyond the cutoff subtract int rho^{beta-1} B Lambda_k(rho h) using the
    // large-argument form Lambda_k(q) ~ amp q^{-(k-1)/2} cos(q - phase) and
    // two integrations by parts; cutoff * h - phase is a multiple of pi.
    const double amp = std::tgamma(0.5 * k) * std::pow(2.0, 0.5 * (k - 1)) / std::sqrt(kPi);
    auto envelope = [&](double rho) {
      return std::pow(rho, beta - 1.0) * in.oscillating(rho) * amp * std::pow(rho * h, -0.5 * (k - 1));
    };
    const double step = cutoff * 1e-4;
    const double derivative = (envelope(cutoff + step) - envelope(cutoff - step)) / (2.0 * step);
    const double sign = (j_end % 2 == 0) ? 1.0 : -1.0;
    const double oscillating_tail = -sign * derivative / (h * h);
    analytic -= oscillating_tail;
  }

  quad::require_converged(e, p.quad_tol(), "riesz_spectral_integral");
  const double c = spectral_constant(p).c_k_beta;
  return c * sphere_area(k) * (e.value + analytic);
}

double variance_rate(double tau, const KernelParams& p) {
  require_time(tau, "variance_rate", true);
  if (tau == 0.0) return 0.0;
  RadialIntegrand in;
  in.plain = [tau](double rho) { return -std::expm1(-tau * rho * rho) / (rho * rho); };
  return riesz_spectral_integral(p, in, 0.0);
}

double increment_energy_spatial(double s, const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& y, const KernelParams& p) {
  require_time(s, "increment_energy_spatial", true);
  require_dim(x, p, "increment_energy_spatial");
  require_dim(y, p, "increment_energy_spatial");
  const double h = (x - y).norm();
  if (h == 0.0 || s == 0.0) return 0.0;
  RadialIntegrand in;
  if (std::isinf(s)) {
    in.oscillating = [](double rho) { return 2.0 / (rho * rho); };
  } else {
    in.oscillating = [s](double rho) { return -2.0 * std::expm1(-s * rho * rho) / (rho * rho); };
  }
  return riesz_spectral_integral(p, in, h);
}

double increment_energy_temporal(double t, double delta, const KernelParams& p) {
  require_time(t, "increment_energy_temporal", true);
  require_time(delta, "increment_energy_temporal", true);
  if (t == 0.0 || delta == 0.0) return 0.0;
  RadialIntegrand in;
  in.plain = [t, delta](double rho) {
    const double r2 = rho * rho;
    const double gap = std::expm1(-0.5 * delta * r2);
    const double horizon = std::isinf(t) ? 1.0 : -std::expm1(-t * r2);
    return gap * gap * horizon / r2;
  };
  return riesz_spectral_integral(p, in, 0.0);
}

// ---------------------------------------------------------------------------
// Absolute-value forms (k = 1). Both reduce, by parabolic scaling, to
// integrals of the standard-normal profiles
//   F(eta) = int int |w|^{-beta} |D(z)| |D(z - w)| dz dw, D = g - g(. - eta)
//   G(q)   = same with D = g_{q+1} - g_q (g_v the N(0, v) density).

namespace {

constexpr double kAbsZ = 10.0;

/// int |D(z)| |D(z - w)| dz with D vanishing beyond [lo, hi] (up to the
/// Gaussian cut) and changing sign at `zeros`.
template <class D>
double autocorrelation(D&& delta, double w, double lo, double hi, const std::vector<double>& marks,
                       double tol) {
  auto f = [&](double z) { return std::abs(delta(z)) * std::abs(delta(z - w)); };
  std::vector<double> pts;
  for (double m : marks) {
    pts.push_back(m);
    pts.push_back(m + w);
  }
  return integrate_pieces(f, pts, std::max(lo, lo + w), std::min(hi, hi + w), tol).value;
}

/// 2 int_0^W w^{-beta} A(w) dw with a power-law rule on the first piece.
template <class A>
double riesz_profile(A&& acf, double beta, double first, const std::vector<double>& marks, double w_max,
                     double tol) {
  quad::Estimate e = quad::power_weighted(acf, beta, first, tol);
  auto f = [&](double w) { return std::pow(w, -beta) * acf(w); };
  e += integrate_pieces(f, marks, first, w_max, tol);
  return 2.0 * e.value;
}

double spatial_profile(double eta, double beta, double tol) {
  auto delta = [eta](double z) { return gaussian_pdf(z, 1.0) - gaussian_pdf(z - eta, 1.0); };
  const std::vector<double> zmarks{0.0, 0.5 * eta, eta, -2.0, 2.0, eta - 2.0, eta + 2.0};
  auto acf = [&](double w) { return autocorrelation(delta, w, -kAbsZ, eta + kAbsZ, zmarks, 1e-2 * tol); };
  const double first = std::min({1.0, eta, 0.5});
  return riesz_profile(acf, beta, first, {0.5, 1.0, 2.0, 4.0, eta, eta + 1.0, eta + 4.0},
                       eta + 2.0 * kAbsZ, tol);
}

double temporal_profile(double q, double beta, double tol) {
  const double v0 = q;
  const double v1 = q + 1.0;
  auto delta = [=](double z) { return gaussian_pdf(z, v1) - gaussian_pdf(z, v0); };
  const double zs = std::sqrt(q * (q + 1.0) * std::log1p(1.0 / q));
  const double s0 = std::sqrt(v0);
  const double s1 = std::sqrt(v1);
  const double cut = kAbsZ * s1;
  std::vector<double> zmarks{0.0, zs, -zs};
  // geometric marks so narrow-profile tails never sit inside a wide panel
  for (double m : {1.0, 2.0, 4.0, 8.0, 12.0}) {
    zmarks.insert(zmarks.end(), {m * s0, -m * s0, m * s1, -m * s1});
  }
  auto acf = [&](double w) { return autocorrelation(delta, w, -cut, cut, zmarks, 1e-2 * tol); };
  const double first = std::min(s0, 1.0);
  std::vector<double> wmarks{zs, 2.0 * zs};
  for (double m : {1.0, 2.0, 4.0, 8.0, 16.0, 24.0}) wmarks.insert(wmarks.end(), {m * s0, m * s1});
  return riesz_profile(acf, beta, first, wmarks, 2.0 * cut, tol);
}

}  // namespace

AbsIntegral spatial_increment_abs(double s, double h, const KernelParams& p) {
  if (p.k() != 1) throw DomainError("spatial_increment_abs: absolute-value form is implemented for k = 1");
  require_time(s, "spatial_increment_abs", true);
  if (std::isnan(h) || h < 0.0) throw DomainError("spatial_increment_abs: negative separation");
  if (h == 0.0 || s == 0.0) return {0.0, 0.0};
  const double beta = p.beta();
  const double tol = 0.1 * p.quad_tol();
  // LHS = 2 h^{2-beta} int_{h/sqrt(s)}^inf eta^{beta-3} F(eta) d eta
  const double eta0 = std::isinf(s) ? 0.0 : h / std::sqrt(s);
  constexpr double eps = 1e-3;
  constexpr double big = 40.0;
  auto f = [&](double eta) { return std::pow(eta, beta - 3.0) * spatial_profile(eta, beta, tol); };
  double body = 0.0;
  double tail = 0.0;
  const double lo = std::max(eta0, eps);
  if (lo < big) {
    auto e = quad::log_panels(f, lo, big, 1.0, 10.0 * tol);
    quad::require_converged(e, p.quad_tol(), "spatial_increment_abs");
    body = e.value;
    tail += spatial_profile(big, beta, tol) * std::pow(big, beta - 2.0) / (2.0 - beta);
  } else {
    tail += spatial_profile(eta0, beta, tol) * std::pow(eta0, beta - 2.0) / (2.0 - beta);
  }
  if (eta0 < eps) {
    // F(eta) ~ F(eps) (eta / eps)^2 on (eta0, eps)
    tail += spatial_profile(eps, beta, tol) / (eps * eps) * (std::pow(eps, beta) - std::pow(eta0, beta)) / beta;
  }
  const double scale = 2.0 * std::pow(h, 2.0 - beta);
  return {scale * (body + tail), scale * tail};
}

AbsIntegral temporal_increment_abs(double t, double delta, const KernelParams& p) {
  if (p.k() != 1) throw DomainError("temporal_increment_abs: absolute-value form is implemented for k = 1");
  require_time(t, "temporal_increment_abs", true);
  require_time(delta, "temporal_increment_abs", true);
  if (t == 0.0 || delta == 0.0) return {0.0, 0.0};
  const double beta = p.beta();
  const double tol = 0.1 * p.quad_tol();
  // LHS = delta^{1-beta/2} int_0^{t/delta} G(q) dq
  const double upper = std::isinf(t) ? kInfinity : t / delta;
  constexpr double q_lo = 1e-8;
  constexpr double q_hi = 1e4;
  auto g = [&](double q) { return temporal_profile(q, beta, tol); };
  double body = 0.0;
  double tail = 0.0;
  const double top = std::min(upper, q_hi);
  if (top > q_lo) {
    auto e = quad::log_panels(g, q_lo, top, 1.0, 10.0 * tol);
    quad::require_converged(e, p.quad_tol(), "temporal_increment_abs");
    body = e.value;
    tail += g(q_lo) * q_lo / (1.0 - 0.5 * beta);  // G ~ q^{-beta/2} near 0
  } else {
    tail += g(top) * top / (1.0 - 0.5 * beta);
  }
  if (upper > q_hi) {
    // G ~ q^{-2-beta/2} for large q
    const double ratio = std::isinf(upper) ? 0.0 : std::pow(q_hi / upper, 1.0 + 0.5 * beta);
    tail += g(q_hi) * q_hi / (1.0 + 0.5 * beta) * (1.0 - ratio);
  }
  const double scale = std::pow(delta, 1.0 - 0.5 * beta);
  return {scale * (body + tail), scale * tail};
}

}  // namespace rieszheat
