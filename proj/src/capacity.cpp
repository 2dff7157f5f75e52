#include "rieszheat/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "rieszheat/errors.hpp"
#include "rieszheat/kernel.hpp"
#include "rieszheat/quadrature.hpp"

namespace rieszheat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr long kMaxNodes = 6000;
constexpr long kMaxIterations = 100000;
constexpr double kStopRelChange = 1e-8;
constexpr double kStopGap = 1e-7;
constexpr double kSelfTol = 1e-10;

double unit_ball_volume(int m) { return std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m + 1.0); }

/// int_0^1 e^{-s u^2} (1 - u) du
double box_profile(double s) {
  if (s < 1e-4) return 0.5 - s / 12.0 + s * s / 60.0;
  const double r = std::sqrt(s);
  return std::sqrt(kPi) * std::erf(r) / (2.0 * r) + std::expm1(-s) / (2.0 * s);
}

std::vector<double> positive_sides(const Eigen::VectorXd& sides) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < sides.size(); ++i) {
    if (sides(i) > 0.0) out.push_back(sides(i));
  }
  return out;
}

Eigen::MatrixXd fibonacci_sphere(int count) {
  Eigen::MatrixXd pts(3, count);
  const double golden = kPi * (1.0 + std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double phi = std::acos(1.0 - 2.0 * (i + 0.5) / count);
    const double theta = golden * (i + 0.5);
    pts.col(i) << std::cos(theta) * std::sin(phi), std::sin(theta) * std::sin(phi), std::cos(phi);
  }
  return pts;
}

double cell_self_energy(const Eigen::VectorXd& sides, double index, double diameter) {
  const auto pos = positive_sides(sides);
  if (index > 0.0) return box_self_energy(sides, index);
  // logarithmic kernel: uniform ball of the same volume
  double vol = 1.0;
  for (double s : pos) vol *= s;
  const int m = static_cast<int>(pos.size());
  const double a = std::pow(vol / unit_ball_volume(m), 1.0 / m);
  return ball_self_energy(m, a, 0.0, diameter);
}

}  // namespace

double critical_dimension(int d, int k, double beta) {
  if (d < 1 || k < 1) throw DomainError("critical_dimension: d and k must be >= 1");
  if (!(beta > 0.0 && beta < std::min(2.0, static_cast<double>(k)))) {
    throw DomainError("critical_dimension: need 0 < beta < min(2, k)");
  }
  return d - (4.0 + 2.0 * k) / (2.0 - beta);
}

CompactSet CompactSet::point(Eigen::VectorXd p, double bound_m) {
  CompactSet s;
  s.kind_ = Kind::Point;
  s.a_ = std::move(p);
  s.b_ = s.a_;
  s.bound_m_ = bound_m;
  s.check_bound();
  return s;
}

CompactSet CompactSet::box(Eigen::VectorXd lo, Eigen::VectorXd hi, int resolution, double bound_m) {
  if (lo.size() != hi.size() || lo.size() == 0) throw ConfigError("box: corners differ in dimension");
  if ((hi.array() < lo.array()).any()) throw ConfigError("box: hi must dominate lo");
  if (resolution < 1) throw ConfigError("box: resolution must be >= 1");
  CompactSet s;
  s.kind_ = Kind::Box;
  s.a_ = std::move(lo);
  s.b_ = std::move(hi);
  s.resolution_ = resolution;
  s.bound_m_ = bound_m;
  s.check_bound();
  return s;
}

CompactSet CompactSet::ball(Eigen::VectorXd center, double radius, int resolution, double bound_m) {
  if (center.size() == 0) throw ConfigError("ball: empty center");
  if (!(radius >= 0.0)) throw ConfigError("ball: radius must be >= 0");
  if (resolution < 1) throw ConfigError("ball: resolution must be >= 1");
  CompactSet s;
  s.kind_ = Kind::Ball;
  s.a_ = std::move(center);
  s.b_ = s.a_;
  s.radius_ = radius;
  s.resolution_ = resolution;
  s.bound_m_ = bound_m;
  s.check_bound();
  return s;
}

CompactSet CompactSet::cloud(Eigen::MatrixXd points, double bound_m) {
  if (points.cols() == 0 || points.rows() == 0) throw ConfigError("cloud: empty point set");
  CompactSet s;
  s.kind_ = Kind::PointCloud;
  s.a_ = points.col(0);
  s.b_ = s.a_;
  s.points_ = std::move(points);
  s.bound_m_ = bound_m;
  s.check_bound();
  return s;
}

void CompactSet::check_bound() const {
  if (!(bound_m_ > 0.0)) throw ConfigError("compact set: bound M must be positive");
  auto inside = [&](const Eigen::VectorXd& v) { return (v.array().abs() <= bound_m_ * (1.0 + 1e-12)).all(); };
  bool ok = true;
  switch (kind_) {
    case Kind::Point: ok = inside(a_); break;
    case Kind::Box: ok = inside(a_) && inside(b_); break;
    case Kind::Ball: ok = inside((a_.array() - radius_).matrix()) && inside((a_.array() + radius_).matrix()); break;
    case Kind::PointCloud:
      for (Eigen::Index i = 0; i < points_.cols(); ++i) ok = ok && inside(points_.col(i));
      break;
  }
  if (!ok) throw ConfigError("compact set: not contained in [-M, M]^d");
}

CompactSet CompactSet::scaled(double a) const {
  if (!(a > 0.0)) throw ConfigError("scaled: factor must be positive");
  CompactSet s = *this;
  s.a_ *= a;
  s.b_ *= a;
  s.radius_ *= a;
  s.points_ *= a;
  s.bound_m_ *= a;
  return s;
}

int CompactSet::intrinsic_dimension() const {
  switch (kind_) {
    case Kind::Point:
    case Kind::PointCloud: return 0;
    case Kind::Box: return static_cast<int>(positive_sides(b_ - a_).size());
    case Kind::Ball: return radius_ > 0.0 ? dim() : 0;
  }
  return 0;
}

std::string CompactSet::describe() const {
  std::ostringstream os;
  auto vec = [&](const Eigen::VectorXd& v) {
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
    os << ")";
  };
  switch (kind_) {
    case Kind::Point: os << "point"; vec(a_); break;
    case Kind::Box: os << "box"; vec(a_); vec(b_); break;
    case Kind::Ball: os << "ball"; vec(a_); os << "r=" << radius_; break;
    case Kind::PointCloud: os << "cloud[" << points_.cols() << "]"; break;
  }
  return os.str();
}

double riesz_kernel(double r, double index, double diameter) {
  if (index < 0.0) return 1.0;
  if (index == 0.0) return r >= diameter ? 1.0 : 1.0 + std::log(diameter) - std::log(r);
  return std::pow(r, -index);
}

double box_self_energy(const Eigen::VectorXd& sides, double index) {
  const auto pos = positive_sides(sides);
  const int m = static_cast<int>(pos.size());
  if (!(index > 0.0) || index >= m) throw DomainError("box_self_energy: need 0 < index < box dimension");
  // |x|^{-a} = Gamma(a/2)^{-1} int_0^inf t^{a/2-1} e^{-t|x|^2} dt turns the
  // 2m-dimensional integral into a product of one-dimensional profiles.
  const double hmin = *std::min_element(pos.begin(), pos.end());
  const double hmax = *std::max_element(pos.begin(), pos.end());
  auto f = [&](double t) {
    double prod = 1.0;
    for (double h : pos) prod *= box_profile(t * h * h);
    return std::pow(t, 0.5 * index - 1.0) * prod;
  };
  const double lo = 1e-12 / (hmax * hmax);
  const double hi = 1e16 / (hmin * hmin);
  auto e = quad::log_panels(f, lo, hi, 2.0, kSelfTol);
  quad::require_converged(e, 1e-8, "box_self_energy");
  double tails = std::pow(0.5, m) * std::pow(lo, 0.5 * index) / (0.5 * index);
  double far = 1.0;
  for (double h : pos) far *= std::sqrt(kPi) / (2.0 * h);
  tails += far * std::pow(hi, 0.5 * (index - m)) / (0.5 * (m - index));
  return std::pow(2.0, m) / std::tgamma(0.5 * index) * (e.value + tails);
}

double ball_self_energy(int m, double a, double index, double diameter) {
  if (m < 1 || !(a > 0.0)) throw DomainError("ball_self_energy: need m >= 1 and a > 0");
  if (index < 0.0 || index >= m) throw DomainError("ball_self_energy: need 0 <= index < m");
  // distance density of two uniform points: m r^{m-1} a^{-m} I_{1 - r^2/4a^2}((m+1)/2, 1/2)
  auto density_factor = [&](double r) {
    const double x = std::max(0.0, 1.0 - r * r / (4.0 * a * a));
    return m / std::pow(a, m) * boost::math::ibeta(0.5 * (m + 1), 0.5, x);
  };
  if (index > 0.0) {
    auto e = quad::power_weighted(density_factor, index - (m - 1), 2.0 * a, kSelfTol);
    quad::require_converged(e, 1e-8, "ball_self_energy");
    return e.value;
  }
  if (!(diameter > 0.0)) throw DomainError("ball_self_energy: log kernel needs the diameter");
  // r = 2a v^3 flattens the logarithmic singularity at r = 0
  auto f = [&](double v) {
    const double r = 2.0 * a * v * v * v;
    return r > 0.0 ? riesz_kernel(r, 0.0, diameter) * std::pow(r, m - 1) * density_factor(r) * 6.0 * a * v * v : 0.0;
  };
  auto e = quad::gauss_kronrod_pieces(f, {0.0, 0.01, 0.1, 0.5, 1.0}, kSelfTol);
  quad::require_converged(e, 1e-8, "ball_self_energy");
  return e.value;
}

Discretization discretize(const CompactSet& set, double index) {
  const int d = set.dim();
  const double diameter = 2.0 * set.bound_m() * std::sqrt(static_cast<double>(d));
  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> self;
  auto add_cells = [&](const Eigen::VectorXd& lo, const Eigen::VectorXd& sides, const std::vector<int>& counts,
                       auto&& keep) {
    const double e = cell_self_energy(sides, index, diameter);
    std::vector<int> idx(d, 0);
    while (true) {
      Eigen::VectorXd c(d);
      for (int a = 0; a < d; ++a) c(a) = lo(a) + (idx[a] + 0.5) * sides(a);
      if (keep(c)) {
        nodes.push_back(c);
        self.push_back(e);
      }
      int a = 0;
      while (a < d && ++idx[a] == counts[a]) idx[a++] = 0;
      if (a == d) break;
    }
  };

  if (set.kind() == CompactSet::Kind::Box) {
    const Eigen::VectorXd ext = set.hi() - set.lo_or_center();
    const double longest = ext.maxCoeff();
    std::vector<int> counts(d);
    Eigen::VectorXd sides(d);
    for (int a = 0; a < d; ++a) {
      counts[a] = ext(a) > 0.0 ? std::max(1, static_cast<int>(std::lround(set.resolution() * ext(a) / longest))) : 1;
      sides(a) = ext(a) / counts[a];
    }
    add_cells(set.lo_or_center(), sides, counts, [](const Eigen::VectorXd&) { return true; });
  } else if (set.kind() == CompactSet::Kind::Ball) {
    const double r = set.radius();
    const Eigen::VectorXd& center = set.lo_or_center();
    if (d == 1) {
      return discretize(CompactSet::box(center.array() - r, center.array() + r, set.resolution(), set.bound_m()), index);
    }
    const double h = 2.0 * r / set.resolution();
    std::vector<int> counts(d, set.resolution());
    add_cells((center.array() - r).matrix(), Eigen::VectorXd::Constant(d, h), counts,
              [&](const Eigen::VectorXd& c) { return (c - center).norm() < r - 0.5 * h; });
    // Boundary nodes carry the part of the equilibrium measure that sits on
    // or near the sphere. Below index d - 1 each stands for a flat (d-1)-disc
    // of equal area on the sphere; otherwise for a shell cell of depth h/2.
    if (d == 2 || d == 3) {
      const bool flat = index < d - 1;
      const double radius = flat ? r : r - 0.25 * h;
      const double area = sphere_area(d) * std::pow(radius, d - 1);
      const int count = std::max(1, static_cast<int>(std::lround(area / std::pow(h, d - 1))));
      double e = 0.0;
      if (flat) {
        e = ball_self_energy(d - 1, std::pow(area / count / unit_ball_volume(d - 1), 1.0 / (d - 1)), index, diameter);
      } else {
        Eigen::VectorXd sides = Eigen::VectorXd::Constant(d, std::pow(area / count, 1.0 / (d - 1)));
        sides(d - 1) = 0.5 * h;
        e = cell_self_energy(sides, index, diameter);
      }
      Eigen::MatrixXd dirs;
      if (d == 3) {
        dirs = fibonacci_sphere(count);
      } else {
        dirs.resize(2, count);
        for (int i = 0; i < count; ++i) dirs.col(i) << std::cos(2.0 * kPi * i / count), std::sin(2.0 * kPi * i / count);
      }
      for (int i = 0; i < count; ++i) {
        nodes.push_back(center + radius * dirs.col(i));
        self.push_back(e);
      }
    }
  } else {
    throw DomainError("discretize: only boxes and balls have a continuum discretization");
  }
  if (static_cast<long>(nodes.size()) > kMaxNodes) {
    throw ConfigError("discretize: " + std::to_string(nodes.size()) + " nodes exceed the limit of " +
                      std::to_string(kMaxNodes) + "; lower the resolution");
  }
  Discretization out;
  out.nodes.resize(d, static_cast<Eigen::Index>(nodes.size()));
  out.self_energy.resize(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.nodes.col(i) = nodes[i];
    out.self_energy(i) = self[i];
  }
  return out;
}

namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& nodes, double index, const Eigen::VectorXd& self, double diameter) {
  const Eigen::Index n = nodes.cols();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = self(i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = (nodes.col(i) - nodes.col(j)).norm();
      if (r == 0.0 && index >= 0.0) {
        throw DomainError("energy: distinct nodes " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
      k(i, j) = k(j, i) = riesz_kernel(r, index, diameter);
    }
  }
  return k;
}

}  // namespace

double energy(const Eigen::MatrixXd& nodes, const Eigen::VectorXd& weights, double index,
              const Eigen::VectorXd& self_energy, double diameter) {
  if (weights.size() != nodes.cols() || self_energy.size() != nodes.cols()) {
    throw DomainError("energy: nodes, weights and self energies differ in length");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw DomainError("energy: weights must sum to 1");
  if ((weights.array() < 0.0).any()) throw DomainError("energy: weights must be nonnegative");
  if (index < 0.0) return 1.0;
  const Eigen::MatrixXd k = kernel_matrix(nodes, index, self_energy, diameter);
  return weights.dot(k * weights);
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] > t) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

CapacityResult capacity(const CompactSet& set, double index) {
  CapacityResult res;
  res.index = index;
  res.set_description = set.describe();
  if (!std::isfinite(index)) throw DomainError("capacity: index must be finite");
  if (index < 0.0) {
    res.value = 1.0;
    res.energy = 1.0;
    return res;
  }
  if (set.intrinsic_dimension() == 0 || index >= set.intrinsic_dimension()) {
    // points carry infinite energy; so does every set of dimension <= index
    res.value = 0.0;
    res.energy = std::numeric_limits<double>::infinity();
    return res;
  }
  const Discretization disc = discretize(set, index);
  const double diameter = 2.0 * set.bound_m() * std::sqrt(static_cast<double>(set.dim()));
  const Eigen::MatrixXd k = kernel_matrix(disc.nodes, index, disc.self_energy, diameter);
  const Eigen::Index n = disc.nodes.cols();

  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd kw = k * w;
  double e = w.dot(kw);
  double step = 1.0 / (2.0 * k.cwiseAbs().rowwise().sum().maxCoeff());
  Eigen::VectorXd prev_w, prev_g;
  long it = 0;
  for (; it < kMaxIterations; ++it) {
    const Eigen::VectorXd g = 2.0 * kw;
    if (it > 0) {
      // Barzilai-Borwein guess, then Armijo backtracking
      const Eigen::VectorXd sw = w - prev_w;
      const Eigen::VectorXd sg = g - prev_g;
      const double denom = sw.dot(sg);
      if (denom > 0.0) step = sw.squaredNorm() / denom;
    }
    Eigen::VectorXd wn, kwn;
    double en = e;
    for (int back = 0; back < 60; ++back) {
      wn = project_to_simplex(w - step * g);
      kwn = k * wn;
      en = wn.dot(kwn);
      if (en <= e + 1e-4 * g.dot(wn - w)) break;
      step *= 0.5;
    }
    const double rel = std::abs(e - en) / e;
    prev_w = w;
    prev_g = g;
    if (en < e) {
      w = wn;
      kw = kwn;
    }
    const bool stuck = !(en < e);
    e = std::min(e, en);
    // A small step can come from the projection clipping it; only stop once
    // the convexity bound E* >= 2 min_i (Kw)_i - E also certifies the energy.
    const double gap = (e - (2.0 * kw.minCoeff() - e)) / e;
    if (stuck || (rel < kStopRelChange && gap < kStopGap)) break;
  }
  if (it == kMaxIterations) {
    throw NumericError("capacity: projected gradient did not converge", "energy=" + std::to_string(e));
  }
  res.energy = e;
  res.value = 1.0 / e;
  res.nodes = disc.nodes;
  res.weights = w;
  res.iterations = it + 1;
  return res;
}

}  // namespace rieszheat
