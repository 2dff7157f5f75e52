#ifndef RIESZHEAT_LEMMA_SWEEP_HPP
#define RIESZHEAT_LEMMA_SWEEP_HPP

// Supremum of LHS / RHS for each heat-kernel estimate over a log-spaced
// parameter grid. Grids have 9 points per axis at refinement 0 and
// 2 n - 1 points at the next level, so refinements nest.

#include <string>
#include <vector>

#include "rieszheat/kernel.hpp"

namespace rieszheat {

/// m0 used for the mean-value bound; any m0 > 2 keeps the ratio bounded.
inline constexpr double kMeanValueM0 = 4.0;

struct LemmaRatio {
  std::string name;
  std::string bound;          // the right-hand side as text
  double sup_ratio = 0.0;
  std::vector<double> argsup;  // grid coordinates of the supremum
  long evaluations = 0;
};

/// Grid points per axis at a refinement level.
int lemma_grid_points(int refinement);

/// mean_value:        |S(t,x)-S(t,y)| / (|x-y| t^{-(k+1)/2} (e^{-|x|^2/(m0 t)} + e^{-|y|^2/(m0 t)})),
///                    t = 1, x = a e1, a in [-4, 4], |x-y| in [1e-3, 4]
/// l1_increment:      value / (r ^ 1), r = |x-y|/sqrt(t) in [1e-3, 1e3]
/// riesz_increment:   value / (t^{-beta/2} (r ^ 1)), t in [1e-2, 1e2], r in [1e-3, 1e3]
/// energy_spatial:    value / |x-y|^{2-beta}, s in [1e-2, 1e2] plus s = inf, |x-y| in [1e-2, 10]
/// energy_temporal:   value / delta^{(2-beta)/2}, t in [1e-2, 1e2] plus t = inf, delta in [1e-3, 10]
/// abs_spatial, abs_temporal (k = 1 only): the absolute-value double integrals
///                    over the same bounds, s = t = 1 (they depend on s/h^2 and t/delta only)
std::vector<LemmaRatio> lemma_sweep(const KernelParams& params, int refinement, bool include_abs = true,
                                    int workers = 1);

struct PowerLawSlope {
  std::string name;
  double fitted = 0.0;
  double expected = 0.0;
};

/// Log-log slopes over 9 points spanning [0.1, 10] of riesz_convolution(t),
/// variance_rate(tau), increment_energy_spatial(inf, h) and
/// increment_energy_temporal(inf, delta); expected -beta/2, (2-beta)/2,
/// 2-beta, (2-beta)/2.
std::vector<PowerLawSlope> power_law_slopes(const KernelParams& params, int workers = 1);

}  // namespace rieszheat

#endif  // RIESZHEAT_LEMMA_SWEEP_HPP
