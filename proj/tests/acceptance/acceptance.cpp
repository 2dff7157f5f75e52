// Acceptance run: one PASS / FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rieszheat/capacity.hpp"
#include "rieszheat/cli.hpp"
#include "rieszheat/lemma_sweep.hpp"
#include "rieszheat/parallel.hpp"
#include "rieszheat/solver.hpp"

using namespace rieszheat;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Copies every verdict of a subcommand run whose name starts with prefix.
void take_verdicts(Outcome& out, const cli::RunOutcome& r, const std::string& prefix = "") {
  for (const auto& v : r.report["verdicts"]) {
    const std::string name = v["name"];
    if (name.rfind(prefix, 0) != 0) continue;
    out.require(v["pass"].get<bool>(), name + " (" + v["detail"].get<std::string>() + ")");
  }
}

Outcome power_laws() {
  Outcome out;
  const std::vector<std::pair<int, double>> pairs{{1, 0.25}, {1, 0.5}, {1, 0.75}, {2, 0.5}, {2, 1.0}};
  for (const auto& [k, beta] : pairs) {
    double worst = 0.0;
    for (const auto& s : power_law_slopes(KernelParams(k, beta), default_worker_count())) {
      worst = std::max(worst, std::abs(s.fitted - s.expected));
    }
    out.require(worst <= 1e-4, "k=" + std::to_string(k) + " beta=" + num(beta) + " max slope error " + num(worst));
  }
  return out;
}

Outcome lemma_stability() {
  Outcome out;
  const KernelParams p(1, 0.5);
  const auto a = lemma_sweep(p, 0, true, default_worker_count());
  const auto b = lemma_sweep(p, 1, true, default_worker_count());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double change = std::abs(b[i].sup_ratio - a[i].sup_ratio) / std::abs(a[i].sup_ratio);
    out.require(std::isfinite(a[i].sup_ratio) && std::isfinite(b[i].sup_ratio) && change < 0.05,
                a[i].name + " change " + num(change));
  }
  return out;
}

Outcome noise_synthesis() {
  Outcome out;
  take_verdicts(out, cli::run("noise-check", {{"n", "256"}, {"slices", "10000"}}, default_worker_count()));
  return out;
}

Outcome exponents() {
  Outcome out;
  take_verdicts(out, cli::run("exponent", {{"n", "512"}, {"paths", "2000"}, {"check_half_dt", "true"}},
                              default_worker_count()));
  return out;
}

Outcome solver_oracle() {
  Outcome out;
  const KernelParams p(1, 0.5);
  const GridSpec g(1, 128, 4.0, default_dt(128, 4.0));
  const long n = 2000;
  const long steps = steps_for_horizon(g, 1.0);
  const auto values = parallel_map<double>(n, default_worker_count(), [&](std::size_t i) {
    PathIntegrator path(g, p, Coefficients::additive(1));
    path.reset(RngStream(1, i));
    path.advance(steps);
    return path.value_at(64, 0);
  });
  double m2 = 0.0;
  for (double v : values) m2 += v * v / n;
  const double half_width = 1.959963984540054 * m2 * std::sqrt(2.0 / (n - 1));
  const double target = variance_rate(1.0, p);
  out.require(std::abs(m2 - target) < half_width,
              "variance " + num(m2) + " vs " + num(target) + " +- " + num(half_width));

  const GridSpec small(1, 64, 4.0, 0.003);
  const double xi = 2.0 * std::numbers::pi * 5 / 4.0;
  FieldState s{0.0, Eigen::ArrayXXd(small.cells(), 1)};
  for (long i = 0; i < small.cells(); ++i) s.u(i, 0) = std::cos(xi * i * small.spacing());
  FieldState next = s;
  double worst = 0.0;
  const NoiseSlice zero{Eigen::ArrayXXd::Zero(small.cells(), 1), "zero"};
  for (int m = 1; m <= 10; ++m) {
    next = step(next, zero, Coefficients::constant_drift(1, 0.0), small, p);
    worst = std::max(worst, (next.u - std::exp(-0.5 * xi * xi * small.dt() * m) * s.u).abs().maxCoeff());
  }
  out.require(worst < 1e-12, "single-mode decay error " + num(worst));
  return out;
}

Outcome eigen_ratio() {
  Outcome out;
  take_verdicts(out, cli::run("eigen-check", {{"d", "1,2"}}, default_worker_count()));
  return out;
}

Outcome envelope() {
  Outcome out;
  take_verdicts(out, cli::run("density-check", {}, default_worker_count()));
  return out;
}

Outcome capacity_checks() {
  Outcome out;
  const CompactSet ball = CompactSet::ball(Eigen::Vector3d::Zero(), 1.0, 10, 4.0);
  const double unit = capacity(ball, 1.0).value;
  out.require(std::abs(unit - 1.0) <= 0.05, "unit ball " + num(unit));

  for (double a : {0.5, 2.0}) {
    const double scaled = capacity(ball.scaled(a), 1.0).value;
    const double err = std::abs(scaled / (a * unit) - 1.0);
    out.require(err <= 0.05, "scaling a=" + num(a) + " error " + num(err));
  }

  const CompactSet s1 = CompactSet::box(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 1), 4, 4.0);
  const CompactSet s2 = CompactSet::box(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 2), 8, 4.0);
  const CompactSet s3 = CompactSet::box(Eigen::Vector3d(-1, 0, 0), Eigen::Vector3d(1, 1, 2), 8, 4.0);
  bool monotone = true;
  for (double index : {0.5, 1.0, 2.0}) {
    const double c1 = capacity(s1, index).value, c2 = capacity(s2, index).value, c3 = capacity(s3, index).value;
    monotone = monotone && c1 <= c2 + 1e-6 && c2 <= c3 + 1e-6;
  }
  out.require(monotone, "nested boxes monotone");

  const double neg = capacity(ball, critical_dimension(3, 1, 0.5)).value;
  out.require(neg == 1.0, "negative index " + num(neg));
  return out;
}

Outcome hitting() {
  Outcome out;
  take_verdicts(out, cli::run("hitting", {{"paths", "2000"}}, default_worker_count()));
  return out;
}

Outcome determinism() {
  Outcome out;
  const std::vector<std::pair<std::string, cli::Config>> runs{
      {"kernel-check", {}},
      {"noise-check", {{"n", "64"}, {"slices", "640"}, {"lags", "0,3,8"}}},
      {"simulate", {{"n", "32"}, {"T", "0.25"}, {"coeffs", "multiplicative"}, {"d", "2"}}},
      {"exponent", {{"n", "512"}, {"paths", "100"}, {"check_half_dt", "false"}}},
      {"eigen-check", {}},
      {"density-check", {}},
      {"capacity", {{"index", "1"}, {"resolution", "6"}}},
      {"hitting", {{"n", "32"}, {"paths", "500"}, {"T", "0.5"}}},
  };
  for (const auto& [sub, cfg] : runs) {
    const cli::RunOutcome a = cli::run(sub, cfg, 1);
    const cli::RunOutcome b = cli::run(sub, cfg, 4);
    bool same = a.report.dump() == b.report.dump() && a.files.size() == b.files.size();
    for (std::size_t i = 0; same && i < a.files.size(); ++i) same = a.files[i].content == b.files[i].content;
    out.require(same, sub);
  }
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"kernel power laws", power_laws},
      {"lemma ratio stability", lemma_stability},
      {"noise lag covariance", noise_synthesis},
      {"Holder exponents", exponents},
      {"solver vs oracle", solver_oracle},
      {"eigenvalue ratio", eigen_ratio},
      {"density envelope", envelope},
      {"capacity", capacity_checks},
      {"hitting lower bound", hitting},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s %s [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
