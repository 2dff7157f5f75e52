#include "rieszheat/moments.hpp"

#include <cmath>
#include <string>

#include "rieszheat/errors.hpp"
#include "rieszheat/parallel.hpp"

namespace rieszheat {

namespace {

constexpr int kBatches = 20;

struct PathMoments {
  std::vector<double> spatial;
  std::vector<double> temporal;
};

double power_norm(const Eigen::ArrayXd& diff, double p) { return std::pow(diff.matrix().norm(), p); }

double mean_of(const std::vector<double>& v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

}  // namespace

IncrementProbe moment_from_path_values(const std::vector<double>& per_path, double p, double lag) {
  if (!(p >= 2.0)) throw DomainError("increment_moment: p must be >= 2");
  const long n = static_cast<long>(per_path.size());
  if (n < kMinMomentPaths) {
    throw DomainError("increment_moment: need at least " + std::to_string(kMinMomentPaths) + " paths, got " +
                      std::to_string(n));
  }
  const double mean = mean_of(per_path);
  std::vector<double> sq(per_path.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (per_path[i] - mean) * (per_path[i] - mean);
  const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  return {lag, p, mean, std::sqrt(var / static_cast<double>(n)), n};
}

IncrementProbe increment_moment(const Eigen::ArrayXXd& at_tx, const Eigen::ArrayXXd& at_sy, double p, double lag) {
  if (at_tx.rows() != at_sy.rows() || at_tx.cols() != at_sy.cols()) {
    throw DomainError("increment_moment: sample arrays differ in shape");
  }
  std::vector<double> values(at_tx.rows());
  for (Eigen::Index i = 0; i < at_tx.rows(); ++i) values[i] = power_norm((at_tx.row(i) - at_sy.row(i)).transpose(), p);
  return moment_from_path_values(values, p, lag);
}

ExponentFit holder_exponent_fit(const std::vector<double>& lags, const std::vector<double>& moments) {
  if (lags.size() != moments.size()) throw DomainError("holder_exponent_fit: lags and moments differ in length");
  if (lags.size() < 5) throw DomainError("holder_exponent_fit: need at least 5 lags");
  double lo = lags.front();
  double hi = lags.front();
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (!(lags[i] > 0.0)) throw DomainError("holder_exponent_fit: nonpositive lag " + std::to_string(lags[i]));
    if (!(moments[i] > 0.0)) {
      throw DomainError("holder_exponent_fit: nonpositive moment at lag " + std::to_string(lags[i]));
    }
    lo = std::min(lo, lags[i]);
    hi = std::max(hi, lags[i]);
  }
  if (std::log10(hi / lo) < 1.5 - 1e-12) throw DomainError("holder_exponent_fit: lags must span >= 1.5 decades");
  const Eigen::Index n = static_cast<Eigen::Index>(lags.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::log(lags[i]);
    y(i) = std::log(moments[i]);
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - design * beta;
  const double s2 = resid.squaredNorm() / static_cast<double>(n - 2);
  const Eigen::Matrix2d cov = s2 * (design.transpose() * design).inverse();
  return {beta(1), std::sqrt(std::max(0.0, cov(1, 1))), beta(0)};
}

ExponentStudy run_exponent_study(const ExponentStudyConfig& cfg) {
  const GridSpec& grid = cfg.grid;
  if (grid.k() != cfg.params.k()) throw ConfigError("exponent study: grid and kernel dimensions differ");
  if (cfg.n_lags < 5) throw ConfigError("exponent study: need at least 5 lags");
  if (cfg.n_paths < kMinMomentPaths) throw ConfigError("exponent study: need at least 100 paths");
  const int n = grid.n();
  const long shift_max = 2L << (cfg.n_lags - 1);
  if (shift_max > n / 8) {
    throw ConfigError("exponent study: largest spatial lag " + std::to_string(shift_max) +
                      " cells exceeds L/8; increase n or reduce n_lags");
  }
  const long total = steps_for_horizon(grid, cfg.t);
  const long lag_steps_max = 4L << (cfg.n_lags - 1);
  if (lag_steps_max >= total) throw ConfigError("exponent study: horizon too short for the temporal lags");

  // Row-major lattice: a shift along the first axis moves by n^{k-1} cells.
  const long stride = grid.cells() / n;

  auto one_path = [&](std::size_t path) {
    PathIntegrator integ(grid, cfg.params, cfg.coeffs, cfg.zero_mode);
    integ.reset(RngStream(cfg.seed, path));
    PathMoments out;
    std::vector<Eigen::ArrayXXd> earlier;  // states at t - 4 dt 2^j, j = n_lags-1 .. 0
    for (int j = cfg.n_lags - 1; j >= 0; --j) {
      integ.advance(total - (4L << j) - integ.steps_taken());
      earlier.push_back(integ.state().u);
    }
    integ.advance(total - integ.steps_taken());
    const Eigen::ArrayXXd u = integ.state().u;
    const double cells = static_cast<double>(grid.cells());
    for (int j = 0; j < cfg.n_lags; ++j) {
      const Eigen::ArrayXXd& prev = earlier[cfg.n_lags - 1 - j];
      double acc = 0.0;
      for (long i = 0; i < grid.cells(); ++i) acc += power_norm((u.row(i) - prev.row(i)).transpose(), cfg.p);
      out.temporal.push_back(acc / cells);
    }
    for (int j = 0; j < cfg.n_lags; ++j) {
      const long shift = (2L << j) * stride;
      double acc = 0.0;
      for (long i = 0; i < grid.cells(); ++i) {
        // periodic shift along the first axis
        const long block = n * stride;
        const long base = (i / block) * block;
        const long partner = base + (i - base + shift) % block;
        acc += power_norm((u.row(partner) - u.row(i)).transpose(), cfg.p);
      }
      out.spatial.push_back(acc / cells);
    }
    return out;
  };

  const auto paths = parallel_map<PathMoments>(static_cast<std::size_t>(cfg.n_paths), cfg.workers, one_path);

  ExponentStudy study;
  auto collect = [&](bool spatial, int j) {
    std::vector<double> v(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) v[i] = spatial ? paths[i].spatial[j] : paths[i].temporal[j];
    return v;
  };
  std::vector<double> s_lags, t_lags, s_mom, t_mom;
  for (int j = 0; j < cfg.n_lags; ++j) {
    const double s_lag = (2L << j) * grid.spacing();
    const double t_lag = (4L << j) * grid.dt();
    study.spatial.push_back(moment_from_path_values(collect(true, j), cfg.p, s_lag));
    study.temporal.push_back(moment_from_path_values(collect(false, j), cfg.p, t_lag));
    s_lags.push_back(s_lag);
    t_lags.push_back(t_lag);
    s_mom.push_back(study.spatial.back().estimate);
    t_mom.push_back(study.temporal.back().estimate);
  }
  study.spatial_fit = holder_exponent_fit(s_lags, s_mom);
  study.temporal_fit = holder_exponent_fit(t_lags, t_mom);

  // Batch spread of the slope as a Monte Carlo error bar.
  const std::size_t per_batch = paths.size() / kBatches;
  if (per_batch > 0) {
    std::vector<double> ss, ts;
    for (int b = 0; b < kBatches; ++b) {
      std::vector<double> sm(cfg.n_lags, 0.0), tm(cfg.n_lags, 0.0);
      for (std::size_t i = b * per_batch; i < (b + 1) * per_batch; ++i) {
        for (int j = 0; j < cfg.n_lags; ++j) {
          sm[j] += paths[i].spatial[j];
          tm[j] += paths[i].temporal[j];
        }
      }
      ss.push_back(holder_exponent_fit(s_lags, sm).slope);
      ts.push_back(holder_exponent_fit(t_lags, tm).slope);
    }
    auto spread = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= v.size();
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / (v.size() - 1) / v.size());
    };
    study.spatial_mc_std_error = spread(ss);
    study.temporal_mc_std_error = spread(ts);
  }
  return study;
}

}  // namespace rieszheat
