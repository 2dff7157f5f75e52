#ifndef RIESZHEAT_SOLVER_HPP
#define RIESZHEAT_SOLVER_HPP

// Exponential-Euler integrator for
//   du_i = (1/2) Lap u_i dt + sum_j sigma_ij(u) F^j(dt, x) + b_i(u) dt,  u(0) = 0
// on the periodic lattice. One step in spectral space:
//   u^ <- exp(-|xi|^2 dt / 2) (u^ + F[sigma(u) dW + b(u) dt]).

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rieszheat/kernel.hpp"
#include "rieszheat/noise.hpp"
#include "rieszheat/rng.hpp"

namespace rieszheat {

struct Coefficients {
  int d = 1;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> sigma;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> drift;
  double lipschitz_bound = 0.0;
  bool is_additive = false;
  std::string name;

  /// sigma = Id, b = 0.
  static Coefficients additive(int d);
  /// sigma_ij(u) = delta_ij (1 + eps tanh(u_i)), b = 0; ellipticity 1 - eps.
  static Coefficients multiplicative_demo(int d, double eps = 0.5);
  /// sigma = 0, b = c (deterministic drift, used by consistency checks).
  static Coefficients constant_drift(int d, double c);
};

/// Checks finiteness on a probe lattice in [-10, 10]^d and that the
/// empirical Lipschitz ratio max(|dsigma|_F, |db|) / |du| over probe pairs
/// stays within 1.01 x the declared bound. Throws ConfigError otherwise.
void validate_coefficients(const Coefficients& coeffs);

struct FieldState {
  double t = 0.0;
  Eigen::ArrayXXd u;  // cells x d
};

/// Heat-semigroup multipliers for one step on the half-spectrum layout.
Eigen::ArrayXd heat_multipliers(const GridSpec& grid);

/// One exponential-Euler step with a caller-provided noise slice.
FieldState step(const FieldState& state, const NoiseSlice& noise, const Coefficients& coeffs,
                const GridSpec& grid, const KernelParams& params);

/// Integrates one sample path. Additive coefficients keep the field in
/// spectral space (no per-step inverse transform); the general path applies
/// sigma and b pointwise. Both consume the random stream identically.
class PathIntegrator {
 public:
  PathIntegrator(const GridSpec& grid, const KernelParams& params, const Coefficients& coeffs,
                 ZeroMode mode = ZeroMode::CellAveraged);

  /// Restarts from u = 0 at t = 0 with a new stream.
  void reset(const RngStream& rng);
  void advance(long steps);

  double time() const { return t_; }
  long steps_taken() const { return steps_; }
  FieldState state();
  /// u_component at a lattice cell without materializing the whole field.
  double value_at(long cell, int component);

 private:
  void step_general();
  void step_additive();

  GridSpec grid_;
  Coefficients coeffs_;
  NoiseSampler sampler_;
  RngStream rng_;
  Eigen::ArrayXd decay_;
  Eigen::MatrixXi freq_;
  double t_ = 0.0;
  long steps_ = 0;
  // additive: d blocks of spectral_size coefficients (unnormalized transform)
  std::vector<std::complex<double>> spec_;
  std::vector<std::complex<double>> scratch_;
  // general: physical field
  Eigen::ArrayXXd u_;
};

/// Number of steps of size grid.dt() in horizon T; throws unless T is a
/// multiple of dt (relative slack 1e-9).
long steps_for_horizon(const GridSpec& grid, double horizon);

/// Snapshots at n_snapshots equally spaced step indices ending at T (the
/// first at t = 0 when n_snapshots >= 2). T = 0 gives the zero field.
std::vector<FieldState> simulate(const GridSpec& grid, const KernelParams& params, const Coefficients& coeffs,
                                 double horizon, std::uint64_t seed, int n_snapshots, std::uint64_t path = 0,
                                 ZeroMode mode = ZeroMode::CellAveraged);

/// Throws IntegrationError at the first non-finite entry.
void require_finite(const Eigen::ArrayXXd& u, double t);

/// Flat row-major index of a lattice cell.
long cell_index(const GridSpec& grid, const Eigen::VectorXi& cell);

}  // namespace rieszheat

#endif  // RIESZHEAT_SOLVER_HPP
