#include "rieszheat/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rieszheat/errors.hpp"

namespace rieszheat {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Eigen::VectorXd> probe_points(int d) {
  // 7 points per axis on [-10, 10], capped to keep d >= 4 affordable
  const int per_axis = d <= 3 ? 7 : 3;
  std::vector<Eigen::VectorXd> pts;
  std::vector<int> idx(d, 0);
  while (true) {
    Eigen::VectorXd p(d);
    for (int a = 0; a < d; ++a) p(a) = -10.0 + 20.0 * idx[a] / (per_axis - 1);
    pts.push_back(p);
    int a = 0;
    while (a < d && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == d) break;
  }
  return pts;
}

}  // namespace

Coefficients Coefficients::additive(int d) {
  if (d < 1) throw ConfigError("Coefficients: d must be >= 1");
  Coefficients c;
  c.d = d;
  c.sigma = [d](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(d, d); };
  c.drift = [d](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(d); };
  c.lipschitz_bound = 0.0;
  c.is_additive = true;
  c.name = "additive";
  return c;
}

Coefficients Coefficients::multiplicative_demo(int d, double eps) {
  if (d < 1) throw ConfigError("Coefficients: d must be >= 1");
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("Coefficients: demo eps must lie in [0, 1)");
  Coefficients c;
  c.d = d;
  c.sigma = [eps](const Eigen::VectorXd& u) -> Eigen::MatrixXd {
    return (1.0 + eps * u.array().tanh()).matrix().asDiagonal();
  };
  c.drift = [d](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(d); };
  c.lipschitz_bound = eps;
  c.is_additive = false;
  c.name = "multiplicative_demo";
  return c;
}

Coefficients Coefficients::constant_drift(int d, double value) {
  if (d < 1) throw ConfigError("Coefficients: d must be >= 1");
  Coefficients c;
  c.d = d;
  c.sigma = [d](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(d, d); };
  c.drift = [d, value](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(d, value); };
  c.lipschitz_bound = 0.0;
  c.is_additive = false;
  c.name = "constant_drift";
  return c;
}

void validate_coefficients(const Coefficients& coeffs) {
  const int d = coeffs.d;
  if (d < 1) throw ConfigError("coefficients: d must be >= 1");
  if (!coeffs.sigma || !coeffs.drift) throw ConfigError("coefficients: sigma and drift must be set");
  if (!(coeffs.lipschitz_bound >= 0.0) || !std::isfinite(coeffs.lipschitz_bound)) {
    throw ConfigError("coefficients: Lipschitz bound must be finite and nonnegative");
  }
  const auto pts = probe_points(d);
  std::vector<Eigen::MatrixXd> s;
  std::vector<Eigen::VectorXd> b;
  for (const auto& p : pts) {
    s.push_back(coeffs.sigma(p));
    b.push_back(coeffs.drift(p));
    if (s.back().rows() != d || s.back().cols() != d || b.back().size() != d) {
      throw ConfigError("coefficients: sigma must be d x d and drift length d");
    }
    if (!s.back().allFinite() || !b.back().allFinite()) {
      throw ConfigError("coefficients: non-finite value on the probe grid");
    }
  }
  // Nearby pairs along each axis plus a deterministic set of far pairs.
  double worst = 0.0;
  auto check = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const double du = (u - v).norm();
    if (du == 0.0) return;
    const double ds = (coeffs.sigma(u) - coeffs.sigma(v)).norm();
    const double db = (coeffs.drift(u) - coeffs.drift(v)).norm();
    worst = std::max(worst, std::max(ds, db) / du);
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int a = 0; a < d; ++a) {
      Eigen::VectorXd q = pts[i];
      q(a) += 1e-3;
      check(pts[i], q);
    }
    check(pts[i], pts[(i * 7 + 3) % pts.size()]);
  }
  if (worst > 1.01 * coeffs.lipschitz_bound + 1e-12) {
    throw ConfigError("coefficients: empirical Lipschitz ratio " + std::to_string(worst) +
                      " exceeds declared bound " + std::to_string(coeffs.lipschitz_bound));
  }
}

Eigen::ArrayXd heat_multipliers(const GridSpec& grid) {
  const double step = 2.0 * kPi / grid.length();
  Eigen::ArrayXd m(grid.spectral_size());
  for (long s = 0; s < m.size(); ++s) {
    const double xi2 = step * step * half_spectrum_frequency(grid, s).cast<double>().squaredNorm();
    m(s) = std::exp(-0.5 * xi2 * grid.dt());
  }
  return m;
}

void require_finite(const Eigen::ArrayXXd& u, double t) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      if (!std::isfinite(u(i, c))) throw IntegrationError(static_cast<long>(i), static_cast<int>(c), t);
    }
  }
}

long cell_index(const GridSpec& grid, const Eigen::VectorXi& cell) {
  if (cell.size() != grid.k()) throw DomainError("cell_index: wrong dimension");
  long idx = 0;
  for (int a = 0; a < grid.k(); ++a) {
    const int n = grid.n();
    idx = idx * n + ((cell(a) % n) + n) % n;
  }
  return idx;
}

namespace {

/// Exponential-Euler update of a physical field given the forcing f.
void propagate(Eigen::ArrayXXd& u, const Eigen::ArrayXXd& forcing, const Eigen::ArrayXd& decay,
               SpectralWorkspace& fft, std::vector<std::complex<double>>& spec) {
  const double inv = 1.0 / static_cast<double>(u.rows());
  Eigen::ArrayXd work(u.rows());
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    work = u.col(c) + forcing.col(c);
    fft.forward(work.data(), spec.data());
    for (long s = 0; s < decay.size(); ++s) spec[s] *= decay(s);
    fft.inverse(spec.data(), u.col(c).data());
    u.col(c) *= inv;
  }
}

Eigen::ArrayXXd forcing(const Eigen::ArrayXXd& u, const Eigen::ArrayXXd& dw, const Coefficients& coeffs, double dt) {
  Eigen::ArrayXXd f(u.rows(), u.cols());
  Eigen::VectorXd v(u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    v = u.row(i).transpose();
    f.row(i) = (coeffs.sigma(v) * dw.row(i).transpose().matrix() + coeffs.drift(v) * dt).transpose().array();
  }
  return f;
}

}  // namespace

FieldState step(const FieldState& state, const NoiseSlice& noise, const Coefficients& coeffs, const GridSpec& grid,
                const KernelParams& params) {
  if (grid.k() != params.k()) throw DomainError("step: grid and kernel dimensions differ");
  if (!std::isfinite(state.t)) throw DomainError("step: state time is not finite");
  if (state.u.rows() != grid.cells() || state.u.cols() != coeffs.d) throw DomainError("step: state shape mismatch");
  if (noise.values.rows() != grid.cells() || noise.values.cols() != coeffs.d) {
    throw DomainError("step: noise slice shape mismatch");
  }
  SpectralWorkspace fft(grid);
  std::vector<std::complex<double>> spec(grid.spectral_size());
  FieldState next{state.t + grid.dt(), state.u};
  const Eigen::ArrayXXd f = coeffs.is_additive ? noise.values : forcing(state.u, noise.values, coeffs, grid.dt());
  propagate(next.u, f, heat_multipliers(grid), fft, spec);
  require_finite(next.u, next.t);
  return next;
}

PathIntegrator::PathIntegrator(const GridSpec& grid, const KernelParams& params, const Coefficients& coeffs,
                               ZeroMode mode)
    : grid_(grid), coeffs_(coeffs), sampler_(grid, params, coeffs.d, mode), rng_(0, 0), decay_(heat_multipliers(grid)) {
  if (grid.k() != params.k()) throw DomainError("PathIntegrator: grid and kernel dimensions differ");
  freq_.resize(grid.k(), grid.spectral_size());
  for (long s = 0; s < grid.spectral_size(); ++s) freq_.col(s) = half_spectrum_frequency(grid, s);
  if (coeffs_.is_additive) {
    spec_.assign(static_cast<std::size_t>(coeffs.d) * grid.spectral_size(), {0.0, 0.0});
    scratch_.resize(grid.spectral_size());
  } else {
    u_ = Eigen::ArrayXXd::Zero(grid.cells(), coeffs.d);
    scratch_.resize(grid.spectral_size());
  }
}

void PathIntegrator::reset(const RngStream& rng) {
  rng_ = rng;
  t_ = 0.0;
  steps_ = 0;
  if (coeffs_.is_additive) {
    std::fill(spec_.begin(), spec_.end(), std::complex<double>(0.0, 0.0));
  } else {
    u_.setZero();
  }
}

void PathIntegrator::step_additive() {
  const long m = grid_.spectral_size();
  for (int c = 0; c < coeffs_.d; ++c) {
    sampler_.sample_spectral(rng_, scratch_.data());
    std::complex<double>* block = spec_.data() + c * m;
    for (long s = 0; s < m; ++s) block[s] = decay_(s) * (block[s] + scratch_[s]);
  }
}

void PathIntegrator::step_general() {
  const NoiseSlice noise = sampler_.sample(rng_);
  const Eigen::ArrayXXd f = forcing(u_, noise.values, coeffs_, grid_.dt());
  propagate(u_, f, decay_, sampler_.workspace(), scratch_);
}

void PathIntegrator::advance(long steps) {
  for (long i = 0; i < steps; ++i) {
    if (coeffs_.is_additive) {
      step_additive();
    } else {
      step_general();
    }
    ++steps_;
    t_ = steps_ * grid_.dt();
  }
  if (!coeffs_.is_additive) require_finite(u_, t_);
}

FieldState PathIntegrator::state() {
  if (!coeffs_.is_additive) return {t_, u_};
  FieldState out{t_, Eigen::ArrayXXd(grid_.cells(), coeffs_.d)};
  const long m = grid_.spectral_size();
  const double inv = 1.0 / static_cast<double>(grid_.cells());
  for (int c = 0; c < coeffs_.d; ++c) {
    sampler_.workspace().inverse(spec_.data() + c * m, out.u.col(c).data());
    out.u.col(c) *= inv;
  }
  require_finite(out.u, t_);
  return out;
}

double PathIntegrator::value_at(long cell, int component) {
  if (cell < 0 || cell >= grid_.cells() || component < 0 || component >= coeffs_.d) {
    throw DomainError("value_at: index out of range");
  }
  if (!coeffs_.is_additive) return u_(cell, component);
  // Hermitian half-spectrum sum: interior slots of the last axis count twice.
  const int n = grid_.n();
  const int k = grid_.k();
  Eigen::VectorXi pos(k);
  long rest = cell;
  for (int a = k - 1; a >= 0; --a) {
    pos(a) = static_cast<int>(rest % n);
    rest /= n;
  }
  const long m = grid_.spectral_size();
  const int half = n / 2 + 1;
  const std::complex<double>* block = spec_.data() + component * m;
  double total = 0.0;
  for (long s = 0; s < m; ++s) {
    const long last = s % half;
    const double mult = (last == 0 || last == n / 2) ? 1.0 : 2.0;
    const double phase = 2.0 * kPi * static_cast<double>(freq_.col(s).dot(pos) % n) / n;
    total += mult * (block[s].real() * std::cos(phase) - block[s].imag() * std::sin(phase));
  }
  return total / static_cast<double>(grid_.cells());
}

long steps_for_horizon(const GridSpec& grid, double horizon) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be finite and >= 0");
  const double ratio = horizon / grid.dt();
  const double steps = std::round(ratio);
  if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw DomainError("horizon " + std::to_string(horizon) + " is not a multiple of dt " + std::to_string(grid.dt()));
  }
  return static_cast<long>(steps);
}

std::vector<FieldState> simulate(const GridSpec& grid, const KernelParams& params, const Coefficients& coeffs,
                                 double horizon, std::uint64_t seed, int n_snapshots, std::uint64_t path,
                                 ZeroMode mode) {
  if (n_snapshots < 1) throw DomainError("simulate: need at least one snapshot");
  const long total = steps_for_horizon(grid, horizon);
  if (total == 0) return {FieldState{0.0, Eigen::ArrayXXd::Zero(grid.cells(), coeffs.d)}};
  PathIntegrator path_integrator(grid, params, coeffs, mode);
  path_integrator.reset(RngStream(seed, path));
  std::vector<FieldState> out;
  for (int i = 0; i < n_snapshots; ++i) {
    const long target = n_snapshots == 1 ? total : (total * i) / (n_snapshots - 1);
    path_integrator.advance(target - path_integrator.steps_taken());
    out.push_back(path_integrator.state());
  }
  return out;
}

}  // namespace rieszheat
