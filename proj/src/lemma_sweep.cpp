#include "rieszheat/lemma_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rieszheat/moments.hpp"
#include "rieszheat/parallel.hpp"

namespace rieszheat {

namespace {

std::vector<double> log_axis(double lo, double hi, int points) {
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) {
    v[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (points - 1));
  }
  return v;
}

std::vector<double> lin_axis(double lo, double hi, int points) {
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) v[i] = lo + (hi - lo) * i / (points - 1);
  return v;
}

using Cell = std::vector<double>;

LemmaRatio sup_over(std::string name, std::string bound, const std::vector<Cell>& cells, int workers,
                    const std::function<double(const Cell&)>& ratio) {
  const auto values = parallel_map<double>(cells.size(), workers, [&](std::size_t i) { return ratio(cells[i]); });
  LemmaRatio out;
  out.name = std::move(name);
  out.bound = std::move(bound);
  out.evaluations = static_cast<long>(cells.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] <= out.sup_ratio)) {
      out.sup_ratio = values[i];
      out.argsup = cells[i];
    }
  }
  return out;
}

std::vector<Cell> product(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<Cell> out;
  for (double x : a) {
    for (double y : b) out.push_back({x, y});
  }
  return out;
}

Eigen::VectorXd along_first_axis(int k, double a) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
  v(0) = a;
  return v;
}

}  // namespace

int lemma_grid_points(int refinement) {
  int points = 9;
  for (int r = 0; r < refinement; ++r) points = 2 * points - 1;
  return points;
}

std::vector<LemmaRatio> lemma_sweep(const KernelParams& params, int refinement, bool include_abs, int workers) {
  const int n = lemma_grid_points(refinement);
  const int k = params.k();
  const double beta = params.beta();
  std::vector<LemmaRatio> out;

  out.push_back(sup_over("mean_value", "|x-y| t^{-(k+1)/2} (e^{-|x|^2/(m0 t)} + e^{-|y|^2/(m0 t)})",
                         product(lin_axis(-4.0, 4.0, n), log_axis(1e-3, 4.0, n)), workers, [&](const Cell& c) {
                           return mean_value_bound_ratio(1.0, along_first_axis(k, c[0]), along_first_axis(k, c[0] + c[1]),
                                                         kMeanValueM0, params);
                         }));

  std::vector<Cell> r_only;
  for (double r : log_axis(1e-3, 1e3, n)) r_only.push_back({r});
  out.push_back(sup_over("l1_increment", "(|x-y|/sqrt(t)) ^ 1", r_only, workers, [&](const Cell& c) {
    return kernel_l1_increment(1.0, along_first_axis(k, c[0]), Eigen::VectorXd::Zero(k), params) / std::min(c[0], 1.0);
  }));

  out.push_back(sup_over("riesz_increment", "t^{-beta/2} (|x-y|/sqrt(t) ^ 1)",
                         product(log_axis(1e-2, 1e2, n), log_axis(1e-3, 1e3, n)), workers, [&](const Cell& c) {
                           const double t = c[0];
                           const double h = c[1] * std::sqrt(t);
                           const double v = riesz_weighted_increment(t, along_first_axis(k, h), Eigen::VectorXd::Zero(k),
                                                                     params);
                           return v / (std::pow(t, -0.5 * beta) * std::min(c[1], 1.0));
                         }));

  auto horizons = log_axis(1e-2, 1e2, n);
  horizons.push_back(kInfinity);
  out.push_back(sup_over("energy_spatial", "|x-y|^{2-beta}", product(horizons, log_axis(1e-2, 10.0, n)), workers,
                         [&](const Cell& c) {
                           return increment_energy_spatial(c[0], along_first_axis(k, c[1]), Eigen::VectorXd::Zero(k),
                                                           params) /
                                  std::pow(c[1], 2.0 - beta);
                         }));
  out.push_back(sup_over("energy_temporal", "delta^{(2-beta)/2}", product(horizons, log_axis(1e-3, 10.0, n)), workers,
                         [&](const Cell& c) {
                           return increment_energy_temporal(c[0], c[1], params) / std::pow(c[1], 0.5 * (2.0 - beta));
                         }));

  if (include_abs && k == 1) {
    std::vector<Cell> hs, ds;
    for (double h : log_axis(1e-2, 10.0, n)) hs.push_back({h});
    for (double d : log_axis(1e-3, 10.0, n)) ds.push_back({d});
    out.push_back(sup_over("abs_spatial", "|x-y|^{2-beta}", hs, workers, [&](const Cell& c) {
      return spatial_increment_abs(1.0, c[0], params).value / std::pow(c[0], 2.0 - beta);
    }));
    out.push_back(sup_over("abs_temporal", "delta^{(2-beta)/2}", ds, workers, [&](const Cell& c) {
      return temporal_increment_abs(1.0, c[0], params).value / std::pow(c[0], 0.5 * (2.0 - beta));
    }));
  }
  return out;
}

std::vector<PowerLawSlope> power_law_slopes(const KernelParams& params, int workers) {
  const int k = params.k();
  const double beta = params.beta();
  const auto xs = log_axis(0.1, 10.0, 9);
  struct Law {
    const char* name;
    double expected;
    std::function<double(double)> f;
  };
  const std::vector<Law> laws{
      {"riesz_convolution", -0.5 * beta, [&](double t) { return riesz_convolution(t, params); }},
      {"variance_rate", 0.5 * (2.0 - beta), [&](double t) { return variance_rate(t, params); }},
      {"energy_spatial", 2.0 - beta,
       [&](double h) {
         return increment_energy_spatial(kInfinity, along_first_axis(k, h), Eigen::VectorXd::Zero(k), params);
       }},
      {"energy_temporal", 0.5 * (2.0 - beta), [&](double d) { return increment_energy_temporal(kInfinity, d, params); }},
  };
  const auto values = parallel_map<double>(laws.size() * xs.size(), workers,
                                           [&](std::size_t i) { return laws[i / xs.size()].f(xs[i % xs.size()]); });
  std::vector<PowerLawSlope> out;
  for (std::size_t l = 0; l < laws.size(); ++l) {
    std::vector<double> ys(values.begin() + l * xs.size(), values.begin() + (l + 1) * xs.size());
    out.push_back({laws[l].name, holder_exponent_fit(xs, ys).slope, laws[l].expected});
  }
  return out;
}

}  // namespace rieszheat
