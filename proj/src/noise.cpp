#include "rieszheat/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <tuple>

#include <boost/math/quadrature/gauss.hpp>

#include "rieszheat/errors.hpp"
#include "rieszheat/parallel.hpp"

namespace rieszheat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr long kMaxCells = 1L << 26;

// FFTW's planner is not thread safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// int over [-1,1]^k of |u|^{beta-k} du, via the divergence identity
/// (2k / beta) int_{[-1,1]^{k-1}} (1 + |v|^2)^{(beta-k)/2} dv and a tensor
/// Gauss-Legendre rule on the (analytic) face integrand.
double unit_cube_riesz_mass(int k, double beta) {
  if (k == 1) return 2.0 / beta;
  using rule = boost::math::quadrature::gauss<double, 20>;
  // boost stores the nonnegative half of the symmetric rule
  std::vector<double> x, w;
  const auto& ax = rule::abscissa();
  const auto& aw = rule::weights();
  for (std::size_t i = 0; i < ax.size(); ++i) {
    x.push_back(ax[i]);
    w.push_back(aw[i]);
    if (ax[i] != 0.0) {
      x.push_back(-ax[i]);
      w.push_back(aw[i]);
    }
  }
  const int m = k - 1;
  const std::size_t q = x.size();
  std::vector<std::size_t> idx(m, 0);
  double total = 0.0;
  while (true) {
    double r2 = 0.0;
    double weight = 1.0;
    for (int a = 0; a < m; ++a) {
      r2 += x[idx[a]] * x[idx[a]];
      weight *= w[idx[a]];
    }
    total += weight * std::pow(1.0 + r2, 0.5 * (beta - k));
    int a = 0;
    while (a < m && ++idx[a] == q) idx[a++] = 0;
    if (a == m) break;
  }
  return 2.0 * k / beta * total;
}

double zero_cell_weight(const GridSpec& grid, const KernelParams& params) {
  static std::mutex mutex;
  static std::vector<std::tuple<int, double, double>> cache;
  double mass = 0.0;
  {
    std::lock_guard lock(mutex);
    auto it = std::find_if(cache.begin(), cache.end(), [&](const auto& e) {
      return std::get<0>(e) == params.k() && std::get<1>(e) == params.beta();
    });
    if (it == cache.end()) {
      mass = unit_cube_riesz_mass(params.k(), params.beta());
      cache.emplace_back(params.k(), params.beta(), mass);
    } else {
      mass = std::get<2>(*it);
    }
  }
  return spectral_constant(params).c_k_beta * std::pow(kPi / grid.length(), params.beta()) * mass;
}

void check_grid(const GridSpec& grid, const KernelParams& params) {
  if (grid.k() != params.k()) {
    throw DomainError("grid dimension " + std::to_string(grid.k()) + " does not match kernel dimension " +
                      std::to_string(params.k()));
  }
}

template <class T>
void put(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ConfigError("field dump: truncated input");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

constexpr char kMagic[4] = {'R', 'Z', 'H', 'N'};
constexpr std::uint32_t kDumpVersion = 1;

}  // namespace

GridSpec::GridSpec(int k, int n, double length, double dt) : k_(k), n_(n), length_(length), dt_(dt) {
  if (k < 1) throw DomainError("GridSpec: k must be >= 1");
  if (n < 8 || !is_power_of_two(n)) {
    throw DomainError("GridSpec: n must be a power of two >= 8, got " + std::to_string(n));
  }
  if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("GridSpec: length must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("GridSpec: dt must be positive");
  long cells = 1;
  long spectral = n / 2 + 1;
  for (int a = 0; a < k; ++a) {
    cells *= n;
    if (a > 0) spectral *= n;
    if (cells > kMaxCells) throw DomainError("GridSpec: lattice too large");
  }
  cells_ = cells;
  spectral_size_ = spectral;
}

double default_dt(int n, double length) {
  const double h = length / n;
  return 0.25 * h * h;
}

Eigen::VectorXi half_spectrum_frequency(const GridSpec& grid, long slot) {
  const int n = grid.n();
  const int half = n / 2 + 1;
  Eigen::VectorXi j(grid.k());
  j(grid.k() - 1) = static_cast<int>(slot % half);
  slot /= half;
  for (int a = grid.k() - 2; a >= 0; --a) {
    const int i = static_cast<int>(slot % n);
    slot /= n;
    j(a) = i < n / 2 ? i : i - n;
  }
  if (j(grid.k() - 1) == n / 2) j(grid.k() - 1) = -n / 2;
  return j;
}

double spectral_weight(const GridSpec& grid, const KernelParams& params, const Eigen::VectorXi& j, ZeroMode mode) {
  check_grid(grid, params);
  if (j.size() != grid.k()) throw DomainError("spectral_weight: frequency has wrong dimension");
  if (j.isZero()) return mode == ZeroMode::Dropped ? 0.0 : zero_cell_weight(grid, params);
  const double step = 2.0 * kPi / grid.length();
  const double norm = step * j.cast<double>().norm();
  return spectral_constant(params).c_k_beta * std::pow(norm, params.beta() - params.k()) *
         std::pow(step, params.k());
}

Eigen::ArrayXd spectral_weights(const GridSpec& grid, const KernelParams& params, ZeroMode mode) {
  check_grid(grid, params);
  Eigen::ArrayXd w(grid.spectral_size());
  for (long s = 0; s < w.size(); ++s) w(s) = spectral_weight(grid, params, half_spectrum_frequency(grid, s), mode);
  return w;
}

namespace {

/// Visits every full-spectrum integer frequency.
template <class Fn>
void for_each_frequency(const GridSpec& grid, Fn&& fn) {
  const int n = grid.n();
  const int k = grid.k();
  Eigen::VectorXi j = Eigen::VectorXi::Constant(k, -n / 2);
  while (true) {
    fn(j);
    int a = k - 1;
    while (a >= 0 && ++j(a) == n / 2) j(a--) = -n / 2;
    if (a < 0) break;
  }
}

}  // namespace

double lattice_variance(const GridSpec& grid, const KernelParams& params, ZeroMode mode) {
  double total = 0.0;
  for_each_frequency(grid, [&](const Eigen::VectorXi& j) { total += spectral_weight(grid, params, j, mode); });
  return grid.dt() * total;
}

double lattice_covariance(const GridSpec& grid, const KernelParams& params, const Eigen::VectorXd& r,
                          ZeroMode mode) {
  if (r.size() != grid.k()) throw DomainError("lattice_covariance: lag has wrong dimension");
  const double step = 2.0 * kPi / grid.length();
  double total = 0.0;
  for_each_frequency(grid, [&](const Eigen::VectorXi& j) {
    total += spectral_weight(grid, params, j, mode) * std::cos(step * j.cast<double>().dot(r));
  });
  return grid.dt() * total;
}

SpectralWorkspace::SpectralWorkspace(const GridSpec& grid)
    : cells_(grid.cells()), spectral_(grid.spectral_size()) {
  std::vector<int> dims(grid.k(), grid.n());
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(cells_);
  spec_ = fftw_alloc_complex(spectral_);
  r2c_ = fftw_plan_dft_r2c(grid.k(), dims.data(), real_, spec_, FFTW_ESTIMATE);
  c2r_ = fftw_plan_dft_c2r(grid.k(), dims.data(), spec_, real_, FFTW_ESTIMATE);
  if (!r2c_ || !c2r_) throw NumericError("SpectralWorkspace: FFTW planning failed", "k=" + std::to_string(grid.k()));
}

SpectralWorkspace::~SpectralWorkspace() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(r2c_);
  fftw_destroy_plan(c2r_);
  fftw_free(real_);
  fftw_free(spec_);
}

void SpectralWorkspace::forward(const double* in, std::complex<double>* out) {
  std::copy(in, in + cells_, real_);
  fftw_execute(r2c_);
  std::memcpy(static_cast<void*>(out), spec_, sizeof(fftw_complex) * spectral_);
}

void SpectralWorkspace::inverse(const std::complex<double>* in, double* out) {
  std::memcpy(spec_, static_cast<const void*>(in), sizeof(fftw_complex) * spectral_);
  fftw_execute(c2r_);
  std::copy(real_, real_ + cells_, out);
}

NoiseSampler::NoiseSampler(const GridSpec& grid, const KernelParams& params, int d, ZeroMode mode)
    : grid_(grid), d_(d), white_(grid.cells()), spec_(grid.spectral_size()), fft_(grid) {
  if (d < 1) throw DomainError("NoiseSampler: need at least one component");
  gains_ = (spectral_weights(grid, params, mode) * (static_cast<double>(grid.cells()) * grid.dt())).sqrt();
}

void NoiseSampler::sample_spectral(RngStream& rng, std::complex<double>* out) {
  for (long i = 0; i < white_.size(); ++i) white_(i) = rng.gaussian();
  fft_.forward(white_.data(), out);
  for (long s = 0; s < gains_.size(); ++s) out[s] *= gains_(s);
}

NoiseSlice NoiseSampler::sample(RngStream& rng) {
  NoiseSlice slice;
  slice.values.resize(grid_.cells(), d_);
  slice.seed_path = rng.lineage();
  const double inv = 1.0 / static_cast<double>(grid_.cells());
  for (int c = 0; c < d_; ++c) {
    sample_spectral(rng, spec_.data());
    fft_.inverse(spec_.data(), slice.values.col(c).data());
    slice.values.col(c) *= inv;
  }
  return slice;
}

NoiseSlice sample_noise_increment(const GridSpec& grid, const KernelParams& params, int d, RngStream& rng,
                                  ZeroMode mode) {
  NoiseSampler sampler(grid, params, d, mode);
  return sampler.sample(rng);
}

void write_field_dump(std::ostream& out, const FieldDump& dump) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kDumpVersion);
  put<std::int32_t>(out, dump.k);
  put<std::int32_t>(out, dump.n);
  put<double>(out, dump.length);
  put<double>(out, dump.dt);
  put<std::uint64_t>(out, dump.seed);
  put<std::int32_t>(out, static_cast<std::int32_t>(dump.values.cols()));
  put<double>(out, dump.t);
  for (Eigen::Index c = 0; c < dump.values.cols(); ++c) {
    for (Eigen::Index i = 0; i < dump.values.rows(); ++i) put<double>(out, dump.values(i, c));
  }
  if (!out) throw ConfigError("field dump: write failed");
}

FieldDump read_field_dump(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("field dump: bad magic");
  if (get<std::uint32_t>(in) != kDumpVersion) throw ConfigError("field dump: unsupported version");
  FieldDump dump;
  dump.k = get<std::int32_t>(in);
  dump.n = get<std::int32_t>(in);
  dump.length = get<double>(in);
  dump.dt = get<double>(in);
  dump.seed = get<std::uint64_t>(in);
  const int d = get<std::int32_t>(in);
  dump.t = get<double>(in);
  const GridSpec grid(dump.k, dump.n, dump.length, dump.dt);
  if (d < 1) throw ConfigError("field dump: bad component count");
  dump.values.resize(grid.cells(), d);
  for (int c = 0; c < d; ++c) {
    for (long i = 0; i < grid.cells(); ++i) dump.values(i, c) = get<double>(in);
  }
  return dump;
}

std::vector<LagCovariance> lag_covariance_check(const GridSpec& grid, const KernelParams& params,
                                                const std::vector<long>& lags, long n_slices, std::uint64_t seed,
                                                int workers, ZeroMode mode) {
  if (n_slices < 2) throw DomainError("lag_covariance_check: need at least 2 slices");
  const long n = grid.n();
  const long stride = grid.cells() / n;
  for (long lag : lags) {
    if (lag < 0 || lag >= n) throw DomainError("lag_covariance_check: lag must lie in [0, n)");
  }
  // Fixed blocks of slices, each with its own sampler; results do not depend
  // on the worker count.
  constexpr long kBlock = 64;
  const long blocks = (n_slices + kBlock - 1) / kBlock;
  auto per_block = parallel_map<std::vector<double>>(static_cast<std::size_t>(blocks), workers, [&](std::size_t b) {
    NoiseSampler sampler(grid, params, 1, mode);
    std::vector<double> out;
    const long first = static_cast<long>(b) * kBlock;
    const long last = std::min(n_slices, first + kBlock);
    for (long i = first; i < last; ++i) {
      RngStream rng(seed, static_cast<std::uint64_t>(i));
      const Eigen::ArrayXd f = sampler.sample(rng).values.col(0);
      for (long lag : lags) {
        const long shift = lag * stride;
        const long block = n * stride;
        double acc = 0.0;
        for (long c = 0; c < grid.cells(); ++c) {
          const long base = (c / block) * block;
          acc += f(c) * f(base + (c - base + shift) % block);
        }
        out.push_back(acc / static_cast<double>(grid.cells()));
      }
    }
    return out;
  });
  std::vector<LagCovariance> result;
  for (std::size_t j = 0; j < lags.size(); ++j) {
    std::vector<double> v;
    v.reserve(n_slices);
    for (const auto& blk : per_block) {
      for (std::size_t i = j; i < blk.size(); i += lags.size()) v.push_back(blk[i]);
    }
    const double mean = pairwise_sum(v) / static_cast<double>(v.size());
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
    LagCovariance lc;
    lc.lag_cells = lags[j];
    lc.empirical = mean;
    lc.std_error = std::sqrt(var / static_cast<double>(v.size()));
    Eigen::VectorXd r = Eigen::VectorXd::Zero(grid.k());
    r(0) = lags[j] * grid.spacing();
    lc.oracle = lattice_covariance(grid, params, r, mode);
    lc.z_score = (lc.empirical - lc.oracle) / lc.std_error;
    result.push_back(lc);
  }
  return result;
}

}  // namespace rieszheat
