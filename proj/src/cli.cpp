#include "rieszheat/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include <openssl/evp.h>

#include "rieszheat/capacity.hpp"
#include "rieszheat/errors.hpp"
#include "rieszheat/gaussian_oracle.hpp"
#include "rieszheat/hitting.hpp"
#include "rieszheat/lemma_sweep.hpp"
#include "rieszheat/moments.hpp"
#include "rieszheat/noise.hpp"
#include "rieszheat/parallel.hpp"
#include "rieszheat/solver.hpp"

namespace rieszheat::cli {

namespace {

using nlohmann::json;

const std::vector<OptionSpec> kCommon{
    {"seed", "1", "master seed"},
    {"quad_tol", "1e-6", "relative quadrature tolerance"},
};

const std::vector<OptionSpec> kModel{
    {"k", "1", "spatial dimension"},
    {"beta", "0.5", "Riesz exponent, 0 < beta < min(2, k)"},
};

const std::vector<OptionSpec> kLattice{
    {"n", "128", "cells per axis (power of two)"},
    {"L", "4", "torus side length"},
    {"dt", "0", "time step; 0 selects the subcommand default"},
    {"zero_mode", "cell-averaged", "zero-frequency weight: cell-averaged or dropped"},
};

std::vector<OptionSpec> join(std::initializer_list<std::vector<OptionSpec>> parts) {
  std::vector<OptionSpec> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<OptionSpec> with_default(std::vector<OptionSpec> specs, const std::string& key, const std::string& value) {
  for (auto& s : specs) {
    if (s.key == key) s.default_value = value;
  }
  return specs;
}

const std::map<std::string, std::vector<OptionSpec>>& option_table() {
  static const std::map<std::string, std::vector<OptionSpec>> table = [] {
    std::map<std::string, std::vector<OptionSpec>> t;
    t["kernel-check"] = join({kCommon, kModel,
                              {{"refinement", "0", "base grid level; compared with the next level"},
                               {"abs", "true", "include the absolute-value integrals (k = 1)"},
                               {"slope_tol", "1e-4", "power-law slope tolerance"},
                               {"max_drift", "0.05", "allowed relative change of a supremum under refinement"}}});
    t["noise-check"] = join({kCommon, kModel, with_default(kLattice, "n", "256"),
                             {{"slices", "10000", "independent noise slices"},
                              {"lags", "0,1,2,4,8,16,32,64", "lags in cells along the first axis"},
                              {"max_z", "4", "allowed |z| per lag"}}});
    t["simulate"] = join({kCommon, kModel, kLattice,
                          {{"d", "1", "number of components"},
                           {"T", "1", "horizon"},
                           {"coeffs", "additive", "additive or multiplicative"},
                           {"snapshots", "2", "equally spaced snapshots ending at T"},
                           {"path", "0", "path index (stream of the master seed)"}}});
    t["exponent"] = join({kCommon, kModel, with_default(kLattice, "n", "512"),
                          {{"d", "1", "number of components"},
                           {"T", "1", "time of the spatial moments"},
                           {"p", "2", "moment order"},
                           {"paths", "2000", "sample paths"},
                           {"lags", "6", "lags per direction"},
                           {"coeffs", "additive", "additive or multiplicative"},
                           {"check_half_dt", "true", "repeat with dt/2 and gate the slope change"},
                           {"spatial_band", "0.15", "allowed |spatial slope - target|"},
                           {"temporal_band", "0.10", "allowed |temporal slope - target|"}}});
    t["eigen-check"] = join({kCommon, kModel,
                             {{"d", "1,2", "component counts"},
                              {"refinement", "0", "base grid level; compared with the next level"},
                              {"max_drift", "0.05", "allowed relative change of the minimum"}}});
    t["density-check"] = join({kCommon, kModel,
                               {{"pair_points", "4", "pairs per axis"},
                                {"z_points", "25", "(z1, z2) lattice points per axis"},
                                {"orders", "1,2,4", "p values"},
                                {"max_drift", "0.05", "allowed relative change of a supremum under refinement"}}});
    t["capacity"] = join({kCommon,
                          {{"set", "ball", "ball, box, point or cloud"},
                           {"d", "3", "ambient dimension"},
                           {"center", "", "ball center or point (default origin)"},
                           {"radius", "1", "ball radius"},
                           {"lo", "", "box lower corner"},
                           {"hi", "", "box upper corner"},
                           {"points", "", "cloud points as x,y,..;x,y,.."},
                           {"resolution", "10", "cells along the longest axis"},
                           {"M", "2", "bound: the set lies in [-M, M]^d"},
                           {"index", "", "capacity index; empty uses d - (4 + 2k)/(2 - beta)"},
                           {"k", "1", "spatial dimension of the equation (critical index)"},
                           {"beta", "0.5", "Riesz exponent (critical index)"}}});
    t["hitting"] = join({kCommon, kModel, kLattice,
                         {{"d", "1", "number of components"},
                          {"T", "1", "horizon"},
                          {"paths", "2000", "sample paths"},
                          {"coeffs", "additive", "additive or multiplicative"},
                          {"dilation", "", "target inflation radius; empty estimates it"},
                          {"resolution", "8", "target discretization for capacities"},
                          {"c_ref", "", "reference constant for regression flags"},
                          {"max_drift", "0.2", "allowed relative change of c across the nested windows"}}});
    return t;
  }();
  return table;
}

class Params {
 public:
  Params(const std::string& sub, const Config& given) {
    for (const auto& spec : options_for(sub)) values_[spec.key] = spec.default_value;
    for (const auto& [key, value] : given) {
      if (!values_.count(key)) throw ConfigError(sub + ": unknown option '" + key + "'");
      values_[key] = value;
    }
  }

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::string& str(const std::string& key) const { return values_.at(key); }
  bool empty(const std::string& key) const { return str(key).empty(); }

  double num(const std::string& key) const {
    const std::string& s = str(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty() || !std::isfinite(v)) throw ConfigError("option " + key + ": not a number: '" + s + "'");
    return v;
  }

  long integer(const std::string& key) const {
    const double v = num(key);
    if (v != std::floor(v) || std::abs(v) > 1e15) throw ConfigError("option " + key + ": not an integer: '" + str(key) + "'");
    return static_cast<long>(v);
  }

  bool flag(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("option " + key + ": not a boolean: '" + s + "'");
  }

  std::vector<double> list(const std::string& key) const { return parse_list(key, str(key)); }

  std::vector<std::vector<double>> rows(const std::string& key) const {
    std::vector<std::vector<double>> out;
    std::stringstream ss(str(key));
    std::string row;
    while (std::getline(ss, row, ';')) {
      if (!row.empty()) out.push_back(parse_list(key, row));
    }
    return out;
  }

 private:
  static std::vector<double> parse_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (item.empty() || used != item.size()) throw ConfigError("option " + key + ": bad list entry '" + item + "'");
      out.push_back(v);
    }
    return out;
  }

  std::map<std::string, std::string> values_;
};

KernelParams kernel_params(const Params& p) {
  try {
    return KernelParams(static_cast<int>(p.integer("k")), p.num("beta"), p.num("quad_tol"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

ZeroMode zero_mode(const Params& p) {
  if (p.str("zero_mode") == "cell-averaged") return ZeroMode::CellAveraged;
  if (p.str("zero_mode") == "dropped") return ZeroMode::Dropped;
  throw ConfigError("option zero_mode: expected cell-averaged or dropped");
}

GridSpec grid_spec(const Params& p, double default_dt_value) {
  const double dt = p.num("dt") > 0.0 ? p.num("dt") : default_dt_value;
  try {
    return GridSpec(static_cast<int>(p.integer("k")), static_cast<int>(p.integer("n")), p.num("L"), dt);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

Coefficients coefficients(const Params& p) {
  const int d = static_cast<int>(p.integer("d"));
  if (d < 1) throw ConfigError("option d: must be >= 1");
  Coefficients c;
  if (p.str("coeffs") == "additive") {
    c = Coefficients::additive(d);
  } else if (p.str("coeffs") == "multiplicative") {
    c = Coefficients::multiplicative_demo(d);
  } else {
    throw ConfigError("option coeffs: expected additive or multiplicative");
  }
  validate_coefficients(c);
  return c;
}

std::uint64_t seed_of(const Params& p) {
  const long s = p.integer("seed");
  if (s < 0) throw ConfigError("option seed: must be >= 0");
  return static_cast<std::uint64_t>(s);
}

double relative_change(double a, double b) { return std::abs(b - a) / std::max(std::abs(a), 1e-300); }

/// Fixed-format number for CSV cells.
std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

struct Verdicts {
  json list = json::array();
  bool all_pass = true;

  void add(const std::string& name, bool pass, const std::string& detail) {
    list.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    all_pass = all_pass && pass;
  }
};

std::string describe_double(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// ---- subcommands -----------------------------------------------------------

void kernel_check(const Params& p, int threads, json& results, Verdicts& v, std::vector<Artifact>& files) {
  const KernelParams kp = kernel_params(p);
  const int ref = static_cast<int>(p.integer("refinement"));
  if (ref < 0 || ref > 3) throw ConfigError("option refinement: expected 0..3");
  const double drift = p.num("max_drift");
  const auto base = lemma_sweep(kp, ref, p.flag("abs"), threads);
  const auto fine = lemma_sweep(kp, ref + 1, p.flag("abs"), threads);
  std::ostringstream csv;
  csv << "lemma,bound,sup_ratio,sup_ratio_refined,relative_change,evaluations,evaluations_refined\n";
  json lemmas = json::array();
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double change = relative_change(base[i].sup_ratio, fine[i].sup_ratio);
    const bool pass = std::isfinite(base[i].sup_ratio) && std::isfinite(fine[i].sup_ratio) && change < drift;
    csv << base[i].name << ",\"" << base[i].bound << "\"," << fmt(base[i].sup_ratio) << ',' << fmt(fine[i].sup_ratio)
        << ',' << fmt(change) << ',' << base[i].evaluations << ',' << fine[i].evaluations << '\n';
    lemmas.push_back({{"name", base[i].name},
                      {"bound", base[i].bound},
                      {"sup_ratio", base[i].sup_ratio},
                      {"sup_ratio_refined", fine[i].sup_ratio},
                      {"argsup", base[i].argsup},
                      {"relative_change", change}});
    v.add("lemma " + base[i].name, pass, "sup " + describe_double(base[i].sup_ratio) + " -> " +
                                             describe_double(fine[i].sup_ratio) + ", change " + describe_double(change));
  }
  json slopes = json::array();
  for (const auto& s : power_law_slopes(kp, threads)) {
    const double err = std::abs(s.fitted - s.expected);
    slopes.push_back({{"name", s.name}, {"fitted", s.fitted}, {"expected", s.expected}, {"error", err}});
    v.add("slope " + s.name, err <= p.num("slope_tol"),
          "fitted " + describe_double(s.fitted) + ", expected " + describe_double(s.expected));
  }
  results["lemmas"] = lemmas;
  results["power_laws"] = slopes;
  results["m0"] = kMeanValueM0;
  files.push_back({"lemma_ratios.csv", csv.str()});
}

void noise_check(const Params& p, int threads, json& results, Verdicts& v, std::vector<Artifact>& files) {
  const KernelParams kp = kernel_params(p);
  const GridSpec grid = grid_spec(p, default_dt(static_cast<int>(p.integer("n")), p.num("L")));
  std::vector<long> lags;
  for (double l : p.list("lags")) {
    if (l != std::floor(l) || l < 0 || l >= grid.n()) throw ConfigError("option lags: entries must be integers in [0, n)");
    lags.push_back(static_cast<long>(l));
  }
  const auto rows = lag_covariance_check(grid, kp, lags, p.integer("slices"), seed_of(p), threads, zero_mode(p));
  std::ostringstream csv;
  csv << "lag_cells,lag,empirical,std_error,oracle,z\n";
  json out = json::array();
  const double max_z = p.num("max_z");
  for (const auto& r : rows) {
    csv << r.lag_cells << ',' << fmt(r.lag_cells * grid.spacing()) << ',' << fmt(r.empirical) << ',' << fmt(r.std_error)
        << ',' << fmt(r.oracle) << ',' << fmt(r.z_score) << '\n';
    out.push_back({{"lag_cells", r.lag_cells},
                   {"empirical", r.empirical},
                   {"std_error", r.std_error},
                   {"oracle", r.oracle},
                   {"z", r.z_score}});
    v.add("lag " + std::to_string(r.lag_cells), std::abs(r.z_score) <= max_z, "z = " + describe_double(r.z_score));
  }
  results["lags"] = out;
  results["dt"] = grid.dt();
  files.push_back({"lag_covariance.csv", csv.str()});
}

void simulate_cmd(const Params& p, int, json& results, Verdicts& v, std::vector<Artifact>& files) {
  const KernelParams kp = kernel_params(p);
  const GridSpec grid = grid_spec(p, default_dt(static_cast<int>(p.integer("n")), p.num("L")));
  const Coefficients coeffs = coefficients(p);
  const int snaps = static_cast<int>(p.integer("snapshots"));
  if (snaps < 1) throw ConfigError("option snapshots: must be >= 1");
  const long path = p.integer("path");
  if (path < 0) throw ConfigError("option path: must be >= 0");
  const auto states = simulate(grid, kp, coeffs, p.num("T"), seed_of(p), snaps, static_cast<std::uint64_t>(path),
                               zero_mode(p));
  std::ostringstream csv;
  csv << "snapshot,t,component,mean,variance,min,max\n";
  json out = json::array();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    FieldDump dump{grid.k(), grid.n(), grid.length(), grid.dt(), seed_of(p), s.t, s.u};
    std::ostringstream bin(std::ios::binary);
    write_field_dump(bin, dump);
    files.push_back({"field_" + std::to_string(i) + ".rzh", bin.str()});
    for (Eigen::Index c = 0; c < s.u.cols(); ++c) {
      const double mean = s.u.col(c).mean();
      const double var = (s.u.col(c) - mean).square().mean();
      csv << i << ',' << fmt(s.t) << ',' << c << ',' << fmt(mean) << ',' << fmt(var) << ',' << fmt(s.u.col(c).minCoeff())
          << ',' << fmt(s.u.col(c).maxCoeff()) << '\n';
      out.push_back({{"snapshot", i}, {"t", s.t}, {"component", c}, {"mean", mean}, {"spatial_variance", var}});
    }
  }
  results["snapshots"] = out;
  results["dt"] = grid.dt();
  results["stream"] = RngStream(seed_of(p), static_cast<std::uint64_t>(path)).lineage();
  v.add("finite", true, "all snapshots finite");
  files.push_back({"snapshots.csv", csv.str()});
}

json study_json(const ExponentStudy& s) {
  json sp = json::array();
  json tp = json::array();
  for (const auto& q : s.spatial) sp.push_back({{"lag", q.lag}, {"moment", q.estimate}, {"std_error", q.std_error}});
  for (const auto& q : s.temporal) tp.push_back({{"lag", q.lag}, {"moment", q.estimate}, {"std_error", q.std_error}});
  return {{"spatial_slope", s.spatial_fit.slope},
          {"spatial_fit_std_error", s.spatial_fit.slope_std_error},
          {"spatial_mc_std_error", s.spatial_mc_std_error},
          {"temporal_slope", s.temporal_fit.slope},
          {"temporal_fit_std_error", s.temporal_fit.slope_std_error},
          {"temporal_mc_std_error", s.temporal_mc_std_error},
          {"spatial_moments", sp},
          {"temporal_moments", tp}};
}

void exponent_cmd(const Params& p, int threads, json& results, Verdicts& v, std::vector<Artifact>& files) {
  const KernelParams kp = kernel_params(p);
  const double h = p.num("L") / static_cast<double>(p.integer("n"));
  const GridSpec grid = grid_spec(p, 4.0 * h * h);
  ExponentStudyConfig cfg{grid, kp, coefficients(p)};
  cfg.t = p.num("T");
  cfg.p = p.num("p");
  cfg.n_paths = p.integer("paths");
  cfg.seed = seed_of(p);
  cfg.n_lags = static_cast<int>(p.integer("lags"));
  cfg.workers = threads;
  cfg.zero_mode = zero_mode(p);
  const double beta = kp.beta();
  const double target_s = (2.0 - beta) * cfg.p / 2.0;
  const double target_t = (2.0 - beta) * cfg.p / 4.0;
  const double band_s = p.num("spatial_band");
  const double band_t = p.num("temporal_band");

  const ExponentStudy a = run_exponent_study(cfg);
  results["dt"] = grid.dt();
  results["study"] = study_json(a);
  results["spatial_target"] = target_s;
  results["temporal_target"] = target_t;
  v.add("spatial slope", std::abs(a.spatial_fit.slope - target_s) <= band_s,
        describe_double(a.spatial_fit.slope) + " vs " + describe_double(target_s) + " +- " + describe_double(band_s));
  v.add("temporal slope", std::abs(a.temporal_fit.slope - target_t) <= band_t,
        describe_double(a.temporal_fit.slope) + " vs " + describe_double(target_t) + " +- " + describe_double(band_t));

  std::ostringstream csv;
  csv << "dt,direction,lag,moment,std_error\n";
  auto rows = [&](const ExponentStudy& s, double dt) {
    for (const auto& q : s.spatial) csv << fmt(dt) << ",spatial," << fmt(q.lag) << ',' << fmt(q.estimate) << ',' << fmt(q.std_error) << '\n';
    for (const auto& q : s.temporal) csv << fmt(dt) << ",temporal," << fmt(q.lag) << ',' << fmt(q.estimate) << ',' << fmt(q.std_error) << '\n';
  };
  rows(a, grid.dt());

  if (p.flag("check_half_dt")) {
    cfg.grid = grid.with_dt(0.5 * grid.dt());
    const ExponentStudy b = run_exponent_study(cfg);
    rows(b, cfg.grid.dt());
    results["half_dt"] = study_json(b);
    const double ds = std::abs(b.spatial_fit.slope - a.spatial_fit.slope);
    const double dtm = std::abs(b.temporal_fit.slope - a.temporal_fit.slope);
    v.add("spatial slope at dt/2", std::abs(b.spatial_fit.slope - target_s) <= band_s,
          describe_double(b.spatial_fit.slope) + " vs " + describe_double(target_s));
    v.add("temporal slope at dt/2", std::abs(b.temporal_fit.slope - target_t) <= band_t,
          describe_double(b.temporal_fit.slope) + " vs " + describe_double(target_t));
    v.add("spatial stable under dt/2", ds <= 0.5 * band_s, "change " + describe_double(ds));
    v.add("temporal stable under dt/2", dtm <= 0.5 * band_t, "change " + describe_double(dtm));
  }
  files.push_back({"moments.csv", csv.str()});
}

void eigen_check(const Params& p, int threads, json& results, Verdicts& v, std::vector<Artifact>& files) {
  const KernelParams kp = kernel_params(p);
  const int ref = static_cast<int>(p.integer("refinement"));
  if (ref < 0 || ref > 3) throw ConfigError("option refinement: expected 0..3");
  const auto pairs = canonical_pair_grid(ref, kp.k());
  const auto fine = canonical_pair_grid(ref + 1, kp.k());
  json out = json::array();
  for (double dd : p.list("d")) {
    const int d = static_cast<int>(dd);
    if (d < 1 || d != dd) throw ConfigError("option d: entries must be positive integers");
    const EigenSweep a = eigen_sweep(pairs, kp, d, threads);
    const EigenSweep b = eigen_sweep(fine, kp, d, threads);
    const double change = relative_change(a.min_ratio, b.min_ratio);
    out.push_back({{"d", d},
                   {"min_ratio", a.min_ratio},
                   {"min_ratio_refined", b.min_ratio},
                   {"max_ratio", a.max_ratio},
                   {"argmin_tau", a.argmin_tau},
                   {"argmin_h", a.argmin_h},
                   {"relative_change", change},
                   {"max_eigen_discrepancy", std::max(a.max_eigen_discrepancy, b.max_eigen_discrepancy)}});
    v.add("d=" + std::to_string(d) + " positive", a.min_ratio > 0.0 && b.min_ratio > 0.0,
          "min lambda_min/Delta " + describe_double(a.min_ratio));
    v.add("d=" + std::to_string(d) + " refinement", change < p.num("max_drift"), "change " + describe_double(change));
  }
  const auto rows = parallel_map<json>(pairs.size(), threads, [&](std::size_t i) {
    const ZCovariance z = malliavin_matrix_gaussian(pairs[i], kp, 1);
    const double delta = pairs[i].delta_mod(kp.beta());
    return json{pairs[i].t() - pairs[i].s(), pairs[i].separation(), z.lambda_min, delta, z.lambda_min / delta};
  });
  std::ostringstream csv;
  csv << "tau,h,lambda_min,delta,ratio\n";
  for (const auto& r : rows) {
    csv << fmt(r[0].get<double>()) << ',' << fmt(r[1].get<double>()) << ',' << fmt(r[2].get<double>()) << ','
        << fmt(r[3].get<double>()) << ',' << fmt(r[4].get<double>()) << '\n';
  }
  results["sweeps"] = out;
  results["pairs"] = pairs.size();
  results["pairs_refined"] = fine.size();
  files.push_back({"eigen_ratios.csv", csv.str()});
}

void density_check(const Params& p, int threads, json& results, Verdicts& v, std::vector<Artifact>& files) {
  const KernelParams kp = kernel_params(p);
  const int pp = static_cast<int>(p.integer("pair_points"));
  const int zp = static_cast<int>(p.integer("z_points"));
  const auto orders = p.list("orders");
  const EnvelopeSweep a = envelope_sweep(kp, pp, zp, orders, threads);
  const EnvelopeSweep b = envelope_sweep(kp, 2 * pp - 1, 2 * zp - 1, orders, threads);
  std::ostringstream csv;
  csv << "p,sup_ratio,sup_ratio_refined,sup_ratio_far,sup_ratio_far_refined\n";
  json out = json::array();
  bool finite = true;
  bool stable = true;
  for (std::size_t q = 0; q < orders.size(); ++q) {
    csv << fmt(orders[q]) << ',' << fmt(a.sup_ratio[q]) << ',' << fmt(b.sup_ratio[q]) << ',' << fmt(a.sup_ratio_far[q])
        << ',' << fmt(b.sup_ratio_far[q]) << '\n';
    out.push_back({{"p", orders[q]},
                   {"sup_ratio", a.sup_ratio[q]},
                   {"sup_ratio_refined", b.sup_ratio[q]},
                   {"sup_ratio_far", a.sup_ratio_far[q]},
                   {"sup_ratio_far_refined", b.sup_ratio_far[q]}});
    finite = finite && std::isfinite(a.sup_ratio[q]) && std::isfinite(b.sup_ratio[q]);
    stable = stable && relative_change(a.sup_ratio[q], b.sup_ratio[q]) < p.num("max_drift");
  }
  bool monotone = true;
  std::string trail;
  for (std::size_t q = 0; q < orders.size(); ++q) {
    trail += (q ? ", " : "") + describe_double(a.sup_ratio_far[q]);
    if (q > 0 && orders[q] > orders[q - 1] && a.sup_ratio_far[q] > a.sup_ratio_far[q - 1]) monotone = false;
  }
  results["orders"] = out;
  results["configurations"] = a.configurations;
  results["configurations_refined"] = b.configurations;
  v.add("finite", finite, "sup ratios finite");
  v.add("refinement", stable, "relative change below " + describe_double(p.num("max_drift")));
  v.add("nonincreasing in p where |z1-z2| > Delta", monotone, "far-region sups " + trail);
  files.push_back({"envelope.csv", csv.str()});
}

Eigen::VectorXd vec_or_zero(const Params& p, const std::string& key, int d) {
  if (p.empty(key)) return Eigen::VectorXd::Zero(d);
  const auto v = p.list(key);
  if (static_cast<int>(v.size()) != d) throw ConfigError("option " + key + ": expected " + std::to_string(d) + " entries");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), d);
}

void capacity_cmd(const Params& p, int, json& results, Verdicts& v, std::vector<Artifact>& files) {
  const int d = static_cast<int>(p.integer("d"));
  if (d < 1) throw ConfigError("option d: must be >= 1");
  const double m = p.num("M");
  const int res = static_cast<int>(p.integer("resolution"));
  const std::string kind = p.str("set");
  std::optional<CompactSet> set;
  if (kind == "ball") {
    set = CompactSet::ball(vec_or_zero(p, "center", d), p.num("radius"), res, m);
  } else if (kind == "box") {
    if (p.empty("lo") || p.empty("hi")) throw ConfigError("box: options lo and hi are required");
    set = CompactSet::box(vec_or_zero(p, "lo", d), vec_or_zero(p, "hi", d), res, m);
  } else if (kind == "point") {
    set = CompactSet::point(vec_or_zero(p, "center", d), m);
  } else if (kind == "cloud") {
    const auto rows = p.rows("points");
    if (rows.empty()) throw ConfigError("cloud: option points is required");
    Eigen::MatrixXd pts(d, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(rows[i].size()) != d) throw ConfigError("cloud: every point needs d coordinates");
      pts.col(i) = Eigen::Map<const Eigen::VectorXd>(rows[i].data(), d);
    }
    set = CompactSet::cloud(pts, m);
  } else {
    throw ConfigError("option set: expected ball, box, point or cloud");
  }
  double index = 0.0;
  if (p.empty("index")) {
    try {
      index = critical_dimension(d, static_cast<int>(p.integer("k")), p.num("beta"));
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  } else {
    index = p.num("index");
  }
  const CapacityResult r = capacity(*set, index);
  results["set"] = r.set_description;
  results["index"] = r.index;
  results["capacity"] = r.value;
  results["energy"] = std::isfinite(r.energy) ? json(r.energy) : json("inf");
  results["nodes"] = r.nodes.cols();
  results["iterations"] = r.iterations;
  v.add("capacity", std::isfinite(r.value) && r.value >= 0.0, "Cap = " + describe_double(r.value));
  std::ostringstream csv;
  for (int a = 0; a < d; ++a) csv << 'x' << a << ',';
  csv << "weight\n";
  for (Eigen::Index i = 0; i < r.nodes.cols(); ++i) {
    for (int a = 0; a < d; ++a) csv << fmt(r.nodes(a, i)) << ',';
    csv << fmt(r.weights(i)) << '\n';
  }
  files.push_back({"measure.csv", csv.str()});
}

void hitting_cmd(const Params& p, int threads, json& results, Verdicts& v, std::vector<Artifact>& files) {
  const KernelParams kp = kernel_params(p);
  const GridSpec grid = grid_spec(p, default_dt(static_cast<int>(p.integer("n")), p.num("L")));
  const double horizon = p.num("T");
  HittingConfig cfg{grid, kp, coefficients(p)};
  cfg.windows = default_windows(grid, horizon);
  const double t_mid = 0.5 * (cfg.windows[0].t_lo + cfg.windows[0].t_hi);
  cfg.targets = default_target_family(cfg.coeffs.d, kp, t_mid, &cfg.target_names);
  cfg.n_paths = p.integer("paths");
  cfg.seed = seed_of(p);
  cfg.workers = threads;
  if (!p.empty("dilation")) cfg.dilation = p.num("dilation");
  cfg.zero_mode = zero_mode(p);

  const double index = critical_dimension(cfg.coeffs.d, kp.k(), kp.beta());
  std::vector<double> caps;
  for (const auto& t : cfg.targets) {
    // resolution only matters for a nonnegative index
    const CompactSet& ball = t.front();
    caps.push_back(capacity(CompactSet::ball(ball.lo_or_center(), ball.radius(), static_cast<int>(p.integer("resolution")),
                                             ball.bound_m()),
                            index)
                       .value);
  }
  std::optional<double> c_ref;
  if (!p.empty("c_ref")) c_ref = p.num("c_ref");

  const HittingStudy study = run_hitting_study(cfg);
  std::ostringstream csv;
  csv << "window,target,capacity,hits,n,p_hat,ci_lower,ci_upper,hits_undilated,p_hat_undilated,margin\n";
  json windows = json::array();
  std::vector<double> cs;
  for (std::size_t w = 0; w < study.windows.size(); ++w) {
    const auto& wr = study.windows[w];
    const LowerBoundFit fit = lower_bound_check(wr.targets, caps, c_ref);
    cs.push_back(fit.c);
    json targets = json::array();
    for (std::size_t t = 0; t < wr.targets.size(); ++t) {
      const auto& e = wr.targets[t];
      csv << w << ',' << e.name << ',' << fmt(caps[t]) << ',' << e.dilated.hits << ',' << e.dilated.n << ','
          << fmt(e.dilated.p_hat) << ',' << fmt(e.dilated.lower) << ',' << fmt(e.dilated.upper) << ','
          << e.undilated.hits << ',' << fmt(e.undilated.p_hat) << ',' << fmt(fit.targets[t].margin) << '\n';
      targets.push_back({{"name", e.name},
                         {"capacity", caps[t]},
                         {"p_hat", e.dilated.p_hat},
                         {"ci", {e.dilated.lower, e.dilated.upper}},
                         {"p_hat_undilated", e.undilated.p_hat},
                         {"ci_undilated", {e.undilated.lower, e.undilated.upper}},
                         {"margin", fit.targets[t].margin},
                         {"flagged", fit.targets[t].flagged}});
      if (caps[t] > 0.0) {
        v.add("window " + std::to_string(w) + " " + e.name + " CI above 0", e.dilated.lower > 0.0,
              "P in [" + describe_double(e.dilated.lower) + ", " + describe_double(e.dilated.upper) + "]");
      }
    }
    windows.push_back({{"t", {wr.window.t_lo, wr.window.t_hi}},
                       {"j_lo", std::vector<double>(wr.window.j_lo.data(), wr.window.j_lo.data() + wr.window.j_lo.size())},
                       {"j_hi", std::vector<double>(wr.window.j_hi.data(), wr.window.j_hi.data() + wr.window.j_hi.size())},
                       {"dilation", wr.dilation},
                       {"rms_cell_increment", wr.rms_cell_increment},
                       {"time_nodes", wr.time_nodes},
                       {"space_nodes", wr.space_nodes},
                       {"c", fit.c},
                       {"any_flagged", fit.any_flagged},
                       {"targets", targets}});
    v.add("window " + std::to_string(w) + " c > 0", fit.c > 0.0, "c = " + describe_double(fit.c));
    if (c_ref) v.add("window " + std::to_string(w) + " no regression", !fit.any_flagged, "against c_ref");
  }
  const double drift = relative_change(cs.front(), cs.back());
  v.add("c drift across nested windows", drift < p.num("max_drift"), "drift " + describe_double(drift));
  results["capacity_index"] = index;
  results["windows"] = windows;
  results["c_drift"] = drift;
  results["dt"] = grid.dt();
  files.push_back({"hitting.csv", csv.str()});
}

using Handler = void (*)(const Params&, int, json&, Verdicts&, std::vector<Artifact>&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h{
      {"kernel-check", kernel_check}, {"noise-check", noise_check}, {"simulate", simulate_cmd},
      {"exponent", exponent_cmd},     {"eigen-check", eigen_check}, {"density-check", density_check},
      {"capacity", capacity_cmd},     {"hitting", hitting_cmd},
  };
  return h;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"kernel-check", "noise-check",   "simulate", "exponent",
                                              "eigen-check",  "density-check", "capacity", "hitting"};
  return names;
}

const std::vector<OptionSpec>& options_for(const std::string& subcommand) {
  const auto& t = option_table();
  const auto it = t.find(subcommand);
  if (it == t.end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
  return it->second;
}

std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 && EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw NumericError("git_blob_sha1: OpenSSL digest failed", "");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

RunOutcome run(const std::string& subcommand, const Config& config, int threads) {
  if (threads < 1) throw ConfigError("threads must be >= 1");
  const Params params(subcommand, config);
  json echo(params.values());
  const std::string hash = git_blob_sha1(echo.dump());

  RunOutcome outcome;
  json results = json::object();
  Verdicts verdicts;
  handlers().at(subcommand)(params, threads, results, verdicts, outcome.files);

  outcome.exit_code = verdicts.all_pass ? 0 : 1;
  outcome.report = {{"schema_version", kSchemaVersion},
                    {"subcommand", subcommand},
                    {"config", echo},
                    {"seed", seed_of(params)},
                    {"input_hash", hash},
                    {"results", results},
                    {"verdicts", verdicts.list},
                    {"status", verdicts.all_pass ? "PASS" : "FAIL"}};
  return outcome;
}

std::string write_outputs(const RunOutcome& outcome, const std::string& out_dir, const std::string& subcommand) {
  namespace fs = std::filesystem;
  const std::string id = outcome.report.at("input_hash").get<std::string>().substr(0, 12);
  const fs::path parent = fs::path(out_dir) / subcommand;
  fs::create_directories(parent);
  fs::path dir = parent / id;
  for (int i = 2; fs::exists(dir); ++i) dir = parent / (id + "-" + std::to_string(i));
  fs::create_directory(dir);

  json report = outcome.report;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  report["timestamp"] = ts.str();
  report["run_id"] = dir.filename().string();
  std::ofstream(dir / "report.json") << report.dump(2) << '\n';
  for (const auto& f : outcome.files) {
    std::ofstream out(dir / f.name, std::ios::binary);
    out.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
  }
  return dir.string();
}

}  // namespace rieszheat::cli
