#include "rieszheat/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rieszheat/errors.hpp"
#include "rieszheat/parallel.hpp"

namespace rieszheat {

namespace {

constexpr double kZ95 = 1.959963984540054;

struct WindowNodes {
  std::vector<long> cells;
  std::vector<long> neighbors;  // one cell further along the first axis
  long first_step = 0;
  long last_step = 0;
};

WindowNodes window_nodes(const GridSpec& grid, const Window& w, long total_steps) {
  const int k = grid.k();
  const int n = grid.n();
  const double h = grid.spacing();
  const double eps = 1e-9 * h;
  if (w.j_lo.size() != k || w.j_hi.size() != k) throw ConfigError("hitting: window box must lie in R^k");
  if (!(w.t_lo > 0.0) || !(w.t_hi >= w.t_lo)) throw ConfigError("hitting: window time interval must lie in ]0, T]");
  const double reach = grid.length() / 8.0 + eps;
  if ((w.j_lo.array() < -reach).any() || (w.j_hi.array() > reach).any() || (w.j_hi.array() < w.j_lo.array()).any()) {
    throw ConfigError("hitting: window box must lie within [-L/8, L/8]^k of the center");
  }
  std::vector<std::vector<int>> axis(k);
  for (int a = 0; a < k; ++a) {
    for (int i = 0; i < n; ++i) {
      const double off = (i - n / 2) * h;
      if (off >= w.j_lo(a) - eps && off <= w.j_hi(a) + eps) axis[a].push_back(i);
    }
    if (axis[a].empty()) throw ConfigError("hitting: window box contains no lattice cell");
  }
  WindowNodes out;
  std::vector<std::size_t> pos(k, 0);
  Eigen::VectorXi cell(k);
  while (true) {
    for (int a = 0; a < k; ++a) cell(a) = axis[a][pos[a]];
    out.cells.push_back(cell_index(grid, cell));
    cell(0) = (cell(0) + 1) % n;
    out.neighbors.push_back(cell_index(grid, cell));
    int a = 0;
    while (a < k && ++pos[a] == axis[a].size()) pos[a++] = 0;
    if (a == k) break;
  }
  const double dt = grid.dt();
  out.first_step = std::max(1L, static_cast<long>(std::ceil(w.t_lo / dt - 1e-9)));
  out.last_step = static_cast<long>(std::floor(w.t_hi / dt + 1e-9));
  if (out.last_step > total_steps) throw ConfigError("hitting: window extends beyond the horizon");
  if (out.last_step < out.first_step) throw ConfigError("hitting: window time interval contains no time step");
  return out;
}

struct PathRecord {
  std::vector<double> min_distance;  // windows x targets
  std::vector<double> increment_sq;  // per window, mean over cells
};

}  // namespace

double distance_to_set(const CompactSet& set, const Eigen::VectorXd& u) {
  if (u.size() != set.dim()) throw DomainError("distance_to_set: point and set differ in dimension");
  switch (set.kind()) {
    case CompactSet::Kind::Point: return (u - set.lo_or_center()).norm();
    case CompactSet::Kind::Box: {
      const Eigen::VectorXd c = u.cwiseMax(set.lo_or_center()).cwiseMin(set.hi());
      return (u - c).norm();
    }
    case CompactSet::Kind::Ball: return std::max(0.0, (u - set.lo_or_center()).norm() - set.radius());
    case CompactSet::Kind::PointCloud: return (set.points().colwise() - u).colwise().norm().minCoeff();
  }
  return std::numeric_limits<double>::infinity();
}

double distance_to_target(const Target& target, const Eigen::VectorXd& u) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : target) best = std::min(best, distance_to_set(s, u));
  return best;
}

bool hit_indicator(const std::vector<Eigen::ArrayXXd>& snapshots, const Target& target, double dilation) {
  if (target.empty()) return false;
  for (const auto& snap : snapshots) {
    for (Eigen::Index i = 0; i < snap.rows(); ++i) {
      if (distance_to_target(target, snap.row(i).transpose().matrix()) <= dilation) return true;
    }
  }
  return false;
}

Wilson wilson_interval(long hits, long n) {
  if (n <= 0 || hits < 0 || hits > n) throw DomainError("wilson_interval: need 0 <= hits <= n, n > 0");
  Wilson w;
  w.hits = hits;
  w.n = n;
  const double nn = static_cast<double>(n);
  w.p_hat = hits / nn;
  const double z2 = kZ95 * kZ95;
  const double centre = (w.p_hat + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = kZ95 / (1.0 + z2 / nn) * std::sqrt(w.p_hat * (1.0 - w.p_hat) / nn + z2 / (4.0 * nn * nn));
  w.lower = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  w.upper = hits == n ? 1.0 : std::min(1.0, centre + half);
  return w;
}

HittingStudy run_hitting_study(const HittingConfig& cfg) {
  const GridSpec& grid = cfg.grid;
  if (cfg.n_paths < kMinHittingPaths) {
    throw ConfigError("hitting: need at least " + std::to_string(kMinHittingPaths) + " paths, got " +
                      std::to_string(cfg.n_paths));
  }
  if (grid.k() != cfg.params.k()) throw ConfigError("hitting: grid and kernel dimensions differ");
  if (cfg.windows.empty() || cfg.targets.empty()) throw ConfigError("hitting: need at least one window and target");
  if (!cfg.target_names.empty() && cfg.target_names.size() != cfg.targets.size()) {
    throw ConfigError("hitting: target names and targets differ in number");
  }
  for (const auto& t : cfg.targets) {
    for (const auto& s : t) {
      if (s.dim() != cfg.coeffs.d) throw ConfigError("hitting: targets must lie in R^d");
    }
  }
  if (cfg.dilation && !(*cfg.dilation >= 0.0 && *cfg.dilation <= grid.spacing())) {
    throw ConfigError("hitting: dilation must lie in [0, lattice spacing]");
  }
  double horizon = 0.0;
  for (const auto& w : cfg.windows) horizon = std::max(horizon, w.t_hi);
  const long total = static_cast<long>(std::floor(horizon / grid.dt() + 1e-9));
  std::vector<WindowNodes> nodes;
  for (const auto& w : cfg.windows) nodes.push_back(window_nodes(grid, w, total));

  const std::size_t nw = cfg.windows.size();
  const std::size_t nt = cfg.targets.size();
  const int d = cfg.coeffs.d;

  auto one_path = [&](std::size_t path) {
    PathIntegrator integ(grid, cfg.params, cfg.coeffs, cfg.zero_mode);
    integ.reset(RngStream(cfg.seed, path));
    PathRecord rec;
    rec.min_distance.assign(nw * nt, std::numeric_limits<double>::infinity());
    rec.increment_sq.assign(nw, 0.0);
    Eigen::VectorXd u(d);
    for (long s = 1; s <= total; ++s) {
      integ.advance(1);
      bool active = false;
      for (const auto& wn : nodes) active = active || (s >= wn.first_step && s <= wn.last_step);
      if (!active) continue;
      const FieldState state = integ.state();
      require_finite(state.u, state.t);
      for (std::size_t w = 0; w < nw; ++w) {
        const WindowNodes& wn = nodes[w];
        if (s < wn.first_step || s > wn.last_step) continue;
        for (long c : wn.cells) {
          u = state.u.row(c).transpose().matrix();
          for (std::size_t t = 0; t < nt; ++t) {
            double& m = rec.min_distance[w * nt + t];
            m = std::min(m, distance_to_target(cfg.targets[t], u));
          }
        }
        if (s == wn.last_step) {
          double acc = 0.0;
          for (std::size_t i = 0; i < wn.cells.size(); ++i) {
            acc += (state.u.row(wn.neighbors[i]) - state.u.row(wn.cells[i])).matrix().squaredNorm();
          }
          rec.increment_sq[w] = acc / static_cast<double>(wn.cells.size());
        }
      }
    }
    return rec;
  };

  const auto records = parallel_map<PathRecord>(static_cast<std::size_t>(cfg.n_paths), cfg.workers, one_path);

  HittingStudy study;
  study.n_paths = cfg.n_paths;
  for (std::size_t w = 0; w < nw; ++w) {
    WindowResult wr;
    wr.window = cfg.windows[w];
    wr.time_nodes = nodes[w].last_step - nodes[w].first_step + 1;
    wr.space_nodes = static_cast<long>(nodes[w].cells.size());
    std::vector<double> sq(records.size());
    for (std::size_t p = 0; p < records.size(); ++p) sq[p] = records[p].increment_sq[w];
    wr.rms_cell_increment = std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));
    wr.dilation = cfg.dilation ? *cfg.dilation : std::min(0.5 * wr.rms_cell_increment, grid.spacing());
    for (std::size_t t = 0; t < nt; ++t) {
      long dilated = 0;
      long plain = 0;
      for (const auto& rec : records) {
        const double m = rec.min_distance[w * nt + t];
        if (m <= wr.dilation) ++dilated;
        if (m <= 0.0) ++plain;
      }
      TargetEstimate est;
      est.name = cfg.target_names.empty() ? "target" + std::to_string(t) : cfg.target_names[t];
      est.dilated = wilson_interval(dilated, cfg.n_paths);
      est.undilated = wilson_interval(plain, cfg.n_paths);
      wr.targets.push_back(est);
    }
    study.windows.push_back(std::move(wr));
  }
  return study;
}

LowerBoundFit lower_bound_check(const std::vector<TargetEstimate>& estimates, const std::vector<double>& capacities,
                                std::optional<double> c_ref) {
  if (estimates.size() != capacities.size()) throw DomainError("lower_bound_check: estimates and capacities differ");
  LowerBoundFit fit;
  fit.c = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (capacities[i] > 0.0) {
      fit.c = std::min(fit.c, estimates[i].dilated.lower / capacities[i]);
      any = true;
    }
  }
  if (!any) throw DomainError("lower_bound_check: every target has zero capacity; the bound is vacuous");
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    TargetMargin m;
    m.name = estimates[i].name;
    m.capacity = capacities[i];
    m.p_lower = estimates[i].dilated.lower;
    m.p_upper = estimates[i].dilated.upper;
    m.skipped = !(capacities[i] > 0.0);
    m.margin = m.p_lower - fit.c * capacities[i];
    m.flagged = c_ref && !m.skipped && m.p_upper < *c_ref * capacities[i];
    fit.any_flagged = fit.any_flagged || m.flagged;
    fit.targets.push_back(m);
  }
  return fit;
}

std::vector<Target> default_target_family(int d, const KernelParams& params, double t_mid,
                                          std::vector<std::string>* names) {
  const double sigma = std::sqrt(variance_rate(t_mid, params));
  std::vector<Target> out;
  for (double f : {1.0, 0.75, 0.5}) {
    const double r = f * sigma;
    out.push_back({CompactSet::ball(Eigen::VectorXd::Zero(d), r, 8, r)});
    if (names) names->push_back("ball_r" + std::to_string(f).substr(0, 4) + "sigma");
  }
  return out;
}

std::vector<Window> default_windows(const GridSpec& grid, double horizon) {
  const int k = grid.k();
  const double l = grid.length();
  return {
      Window{0.75 * horizon, horizon, Eigen::VectorXd::Constant(k, -l / 32), Eigen::VectorXd::Constant(k, l / 32)},
      Window{0.5 * horizon, horizon, Eigen::VectorXd::Constant(k, -l / 16), Eigen::VectorXd::Constant(k, l / 16)},
  };
}

}  // namespace rieszheat
