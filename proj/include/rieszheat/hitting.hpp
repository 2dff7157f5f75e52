#ifndef RIESZHEAT_HITTING_HPP
#define RIESZHEAT_HITTING_HPP

// Monte Carlo probabilities that the simulated field visits a target set over
// a space-time window, and the fit of the constant in the capacity lower
// bound P(hit) >= c Cap(A).
//
// All windows and targets of one study share the same sample paths, so the
// estimates are coupled: nested targets or windows give ordered counts path
// by path.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rieszheat/capacity.hpp"
#include "rieszheat/kernel.hpp"
#include "rieszheat/noise.hpp"
#include "rieszheat/solver.hpp"

namespace rieszheat {

inline constexpr long kMinHittingPaths = 500;

/// A target is a finite union of compact sets; the empty union never is hit.
using Target = std::vector<CompactSet>;

/// Euclidean distance from u to the set (0 inside).
double distance_to_set(const CompactSet& set, const Eigen::VectorXd& u);
double distance_to_target(const Target& target, const Eigen::VectorXd& u);

/// True iff some row of some snapshot (cells x d) lies within `dilation`
/// of the target.
bool hit_indicator(const std::vector<Eigen::ArrayXXd>& snapshots, const Target& target, double dilation);

struct Wilson {
  long hits = 0;
  long n = 0;
  double p_hat = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Wilson score interval at 95%.
Wilson wilson_interval(long hits, long n);

/// Time interval I and a spatial box J given as offsets from the torus
/// center (the cell with index n/2 on every axis).
struct Window {
  double t_lo = 0.0;
  double t_hi = 0.0;
  Eigen::VectorXd j_lo;
  Eigen::VectorXd j_hi;
};

struct HittingConfig {
  GridSpec grid;
  KernelParams params;
  Coefficients coeffs;
  std::vector<Window> windows;
  std::vector<Target> targets;
  std::vector<std::string> target_names;
  long n_paths = 2000;
  std::uint64_t seed = 1;
  int workers = 1;
  /// Fixed inflation radius; by default half the RMS one-cell increment of
  /// the simulated field, capped at the lattice spacing.
  std::optional<double> dilation;
  ZeroMode zero_mode = ZeroMode::CellAveraged;
};

struct TargetEstimate {
  std::string name;
  Wilson dilated;
  Wilson undilated;
};

struct WindowResult {
  Window window;
  double dilation = 0.0;
  double rms_cell_increment = 0.0;
  long time_nodes = 0;
  long space_nodes = 0;
  std::vector<TargetEstimate> targets;
};

struct HittingStudy {
  std::vector<WindowResult> windows;
  long n_paths = 0;
};

/// Throws ConfigError for fewer than 500 paths, windows outside ]0, T] x
/// [-L/8, L/8]^k, empty windows, or targets of the wrong dimension.
HittingStudy run_hitting_study(const HittingConfig& cfg);

struct TargetMargin {
  std::string name;
  double capacity = 0.0;
  double p_lower = 0.0;
  double p_upper = 0.0;
  double margin = 0.0;   // p_lower - c Cap
  bool skipped = false;  // Cap = 0: the bound says nothing
  bool flagged = false;  // p_upper < c_ref Cap
};

struct LowerBoundFit {
  double c = 0.0;
  std::vector<TargetMargin> targets;
  bool any_flagged = false;
};

/// c = min over targets with Cap > 0 of p_lower / Cap. With a reference
/// constant, targets whose upper endpoint falls below c_ref Cap are flagged.
/// Throws DomainError when every capacity is zero.
LowerBoundFit lower_bound_check(const std::vector<TargetEstimate>& estimates, const std::vector<double>& capacities,
                                std::optional<double> c_ref = std::nullopt);

/// Centered balls in R^d of radius {1, 0.75, 0.5} sigma with sigma the
/// standard deviation of one component at time t_mid.
std::vector<Target> default_target_family(int d, const KernelParams& params, double t_mid,
                                          std::vector<std::string>* names = nullptr);

/// Two nested windows: I = [0.75 T, T], J = [-L/32, L/32]^k, and the same
/// doubled: I = [0.5 T, T], J = [-L/16, L/16]^k.
std::vector<Window> default_windows(const GridSpec& grid, double horizon);

}  // namespace rieszheat

#endif  // RIESZHEAT_HITTING_HPP
