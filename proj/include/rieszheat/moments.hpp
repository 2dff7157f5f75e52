#ifndef RIESZHEAT_MOMENTS_HPP
#define RIESZHEAT_MOMENTS_HPP

// Monte Carlo L^p increment moments of simulated fields and log-log fits of
// their scaling exponents.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rieszheat/kernel.hpp"
#include "rieszheat/noise.hpp"
#include "rieszheat/solver.hpp"

namespace rieszheat {

inline constexpr long kMinMomentPaths = 100;

struct IncrementProbe {
  double lag = 0.0;
  double p = 2.0;
  double estimate = 0.0;
  double std_error = 0.0;
  long n_paths = 0;
};

/// Mean of |u(t,x) - u(s,y)|^p over paths; rows are paths, columns the d
/// components. Refuses fewer than 100 paths or p < 2.
IncrementProbe increment_moment(const Eigen::ArrayXXd& at_tx, const Eigen::ArrayXXd& at_sy, double p,
                                double lag = 0.0);

/// Same reduction from per-path statistics (one value of |increment|^p, or
/// its spatial average, per path).
IncrementProbe moment_from_path_values(const std::vector<double>& per_path, double p, double lag);

struct ExponentFit {
  double slope = 0.0;
  double slope_std_error = 0.0;  // ordinary least-squares standard error
  double intercept = 0.0;
};

/// OLS of log(moment) on log(lag). Needs >= 5 lags spanning >= 1.5 decades
/// and positive moments; refusals name the offending lag.
ExponentFit holder_exponent_fit(const std::vector<double>& lags, const std::vector<double>& moments);

struct ExponentStudyConfig {
  GridSpec grid;
  KernelParams params;
  Coefficients coeffs;
  double t = 1.0;
  double p = 2.0;
  long n_paths = 2000;
  std::uint64_t seed = 1;
  int n_lags = 6;
  int workers = 1;
  ZeroMode zero_mode = ZeroMode::CellAveraged;
};

struct ExponentStudy {
  std::vector<IncrementProbe> spatial;   // lags 2h * 2^j along the first axis
  std::vector<IncrementProbe> temporal;  // lags 4 dt * 2^j
  ExponentFit spatial_fit;
  ExponentFit temporal_fit;
  // spread of slopes fitted on 20 consecutive path batches, / sqrt(20)
  double spatial_mc_std_error = 0.0;
  double temporal_mc_std_error = 0.0;
};

/// Simulates n_paths fields (stream i of the seed drives path i) and
/// estimates spatial moments at time t and temporal moments ending at t from
/// the same noise (common random numbers across lags). Each path contributes
/// its average over all lattice cells; paths are the independent replicates.
ExponentStudy run_exponent_study(const ExponentStudyConfig& config);

}  // namespace rieszheat

#endif  // RIESZHEAT_MOMENTS_HPP
