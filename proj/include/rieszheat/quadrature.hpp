#ifndef RIESZHEAT_QUADRATURE_HPP
#define RIESZHEAT_QUADRATURE_HPP

// Thin panel layer over boost's adaptive Gauss-Kronrod rule. Every routine
// returns an Estimate so callers can aggregate error bounds across panels and
// decide convergence against their own relative tolerance.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>
#include <string>
#include <string_view>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rieszheat/errors.hpp"

namespace rieszheat::quad {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;  // integral of |f|, the scale the relative tolerance is measured against

  Estimate& operator+=(const Estimate& o) {
    value += o.value;
    error += o.error;
    l1 += o.l1;
    return *this;
  }
  Estimate scaled(double s) const { return {value * s, error * std::abs(s), l1 * std::abs(s)}; }
};

inline constexpr std::size_t kMaxSubintervals = 4000;

namespace detail {

template <class F>
Estimate gk15(F& f, double a, double b) {
  double error = 0.0;
  double l1 = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &error, &l1);
  return {value, error, l1};
}

}  // namespace detail

/// Globally adaptive G7K15 over consecutive intervals given by sorted
/// breakpoints: the subinterval with the largest error estimate is bisected
/// until the summed error drops below rel_tol times the summed L1 mass.
template <class F>
Estimate gauss_kronrod_pieces(F&& f, const std::vector<double>& edges, double rel_tol) {
  struct Piece {
    double a, b;
    Estimate e;
    bool operator<(const Piece& o) const { return e.error < o.e.error; }
  };
  std::priority_queue<Piece> heap;
  Estimate total;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i + 1] > edges[i])) continue;
    Piece p{edges[i], edges[i + 1], detail::gk15(f, edges[i], edges[i + 1])};
    total += p.e;
    heap.push(p);
  }
  std::size_t splits = 0;
  while (!heap.empty() && total.error > rel_tol * total.l1 && splits < kMaxSubintervals) {
    Piece worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    Piece left{worst.a, mid, detail::gk15(f, worst.a, mid)};
    Piece right{mid, worst.b, detail::gk15(f, mid, worst.b)};
    total.value += left.e.value + right.e.value - worst.e.value;
    total.error += left.e.error + right.e.error - worst.e.error;
    total.l1 += left.e.l1 + right.e.l1 - worst.e.l1;
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  // Re-sum to shed the rounding accumulated by the running updates.
  Estimate exact;
  while (!heap.empty()) {
    exact += heap.top().e;
    heap.pop();
  }
  return exact;
}

/// Adaptive G7K15 on a finite interval.
template <class F>
Estimate gauss_kronrod(F&& f, double a, double b, double rel_tol) {
  if (!(b > a)) return {};
  return gauss_kronrod_pieces(f, {a, b}, rel_tol);
}

/// Integral of f over (0, b] for an integrand with an integrable z^{-power}
/// endpoint singularity, i.e. f(z) = z^{-power} g(z) with g smooth. The
/// substitution z = b v^{1/(1-power)} absorbs the singular weight.
template <class G>
Estimate power_weighted(G&& g, double power, double b, double rel_tol) {
  const double q = 1.0 / (1.0 - power);
  auto integrand = [&](double v) { return g(b * std::pow(v, q)); };
  return gauss_kronrod(integrand, 0.0, 1.0, rel_tol).scaled(std::pow(b, 1.0 - power) * q);
}

/// Integral of f over [lo, hi] (0 < lo < hi) on log-spaced panels, evaluated in
/// the variable v = ln(rho) so power-law integrands become smooth.
template <class F>
Estimate log_panels(F&& f, double lo, double hi, double panels_per_decade, double rel_tol) {
  if (!(hi > lo)) return {};
  const double a = std::log(lo);
  const double b = std::log(hi);
  const int panels =
      std::max(1, static_cast<int>(std::ceil((b - a) / std::log(10.0) * panels_per_decade)));
  const double width = (b - a) / panels;
  auto g = [&](double v) {
    const double rho = std::exp(v);
    return f(rho) * rho;
  };
  std::vector<double> edges(panels + 1);
  for (int i = 0; i <= panels; ++i) edges[i] = a + i * width;
  edges.back() = b;
  return gauss_kronrod_pieces(g, edges, rel_tol);
}

/// Throws NumericError unless the accumulated error is within rel_tol of the
/// integrand's L1 mass.
inline void require_converged(const Estimate& e, double rel_tol, std::string_view what) {
  const bool finite = std::isfinite(e.value) && std::isfinite(e.error);
  const double floor = 64.0 * std::numeric_limits<double>::min();
  if (!finite || e.error > rel_tol * std::max(e.l1, floor)) {
    throw NumericError(std::string(what) + ": quadrature did not converge",
                       "estimate=" + std::to_string(e.value) + " error=" + std::to_string(e.error) +
                           " l1=" + std::to_string(e.l1) + " tol=" + std::to_string(rel_tol));
  }
}

}  // namespace rieszheat::quad

#endif  // RIESZHEAT_QUADRATURE_HPP
