#ifndef RIESZHEAT_NOISE_HPP
#define RIESZHEAT_NOISE_HPP

// Riesz-correlated, temporally white Gaussian noise on a periodic lattice.
//
// Lattice: n points per axis, spacing h = L/n, cells indexed row-major (last
// axis fastest), cell i sits at h*i. Frequencies are xi_j = 2 pi j / L with j
// in [-n/2, n/2) per axis; arrays over frequencies use FFTW's half-spectrum
// layout (last axis j = 0..n/2).
//
// Synthesis: a white field zeta (N(0,1) per cell) is transformed, multiplied
// by G_j = sqrt(N w_j dt) and transformed back with a 1/N factor, giving
//   Cov(W(x), W(y)) = dt * sum_j w_j cos(xi_j . (x - y))
// over the full spectrum. Since zeta is real its transform is Hermitian
// automatically, so self-conjugate frequencies (components 0 or n/2 only)
// carry a real coefficient with the same weight and need no special pairing.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

#include "rieszheat/kernel.hpp"
#include "rieszheat/rng.hpp"

namespace rieszheat {

class GridSpec {
 public:
  GridSpec(int k, int n, double length, double dt);

  int k() const { return k_; }
  int n() const { return n_; }
  double length() const { return length_; }
  double dt() const { return dt_; }
  double spacing() const { return length_ / n_; }
  long cells() const { return cells_; }
  /// Number of entries in the half-spectrum layout: n^{k-1} (n/2 + 1).
  long spectral_size() const { return spectral_size_; }
  /// Grid with the same lattice and a different time step.
  GridSpec with_dt(double dt) const { return GridSpec(k_, n_, length_, dt); }

 private:
  int k_;
  int n_;
  double length_;
  double dt_;
  long cells_;
  long spectral_size_;
};

/// Default time step (L/n)^2 / 4.
double default_dt(int n, double length);

enum class ZeroMode {
  CellAveraged,  // c * int over the zero cell [-pi/L, pi/L]^k of |xi|^{beta-k}
  Dropped,       // weight(0) = 0
};

/// Integer frequency vector (entries in [-n/2, n/2)) of a half-spectrum slot.
Eigen::VectorXi half_spectrum_frequency(const GridSpec& grid, long slot);

/// Weight of an arbitrary integer frequency vector j (xi = 2 pi j / L).
double spectral_weight(const GridSpec& grid, const KernelParams& params, const Eigen::VectorXi& j,
                       ZeroMode mode = ZeroMode::CellAveraged);

/// Weights over the half-spectrum layout.
Eigen::ArrayXd spectral_weights(const GridSpec& grid, const KernelParams& params,
                                ZeroMode mode = ZeroMode::CellAveraged);

/// Theoretical one-cell variance dt * sum over the full spectrum of w_j.
double lattice_variance(const GridSpec& grid, const KernelParams& params, ZeroMode mode = ZeroMode::CellAveraged);

/// Theoretical covariance dt * sum_j w_j cos(xi_j . r) by direct summation
/// over the full spectrum (no FFT).
double lattice_covariance(const GridSpec& grid, const KernelParams& params, const Eigen::VectorXd& r,
                          ZeroMode mode = ZeroMode::CellAveraged);

/// Task-local FFTW plans and buffers for one grid.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const GridSpec& grid);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  /// Unnormalized forward transform of `cells()` doubles.
  void forward(const double* in, std::complex<double>* out);
  /// Unnormalized inverse transform; `in` is left untouched.
  void inverse(const std::complex<double>* in, double* out);

 private:
  long cells_;
  long spectral_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan r2c_;
  fftw_plan c2r_;
};

/// d independent noise components; `values` is cells x d, column i holding
/// component i in row-major lattice order.
struct NoiseSlice {
  Eigen::ArrayXXd values;
  std::string seed_path;
};

/// Reusable per-task sampler. Gaussians are drawn component by component in
/// lattice order, so the physical and spectral entry points consume the
/// stream identically.
class NoiseSampler {
 public:
  NoiseSampler(const GridSpec& grid, const KernelParams& params, int d, ZeroMode mode = ZeroMode::CellAveraged);

  NoiseSlice sample(RngStream& rng);
  /// Unnormalized transform of one component's increment (what `forward`
  /// would return on the physical field times N).
  void sample_spectral(RngStream& rng, std::complex<double>* out);

  const GridSpec& grid() const { return grid_; }
  int components() const { return d_; }
  const Eigen::ArrayXd& gains() const { return gains_; }
  SpectralWorkspace& workspace() { return fft_; }

 private:
  GridSpec grid_;
  int d_;
  Eigen::ArrayXd gains_;
  Eigen::ArrayXd white_;
  std::vector<std::complex<double>> spec_;
  SpectralWorkspace fft_;
};

/// One slice with a fresh sampler.
NoiseSlice sample_noise_increment(const GridSpec& grid, const KernelParams& params, int d, RngStream& rng,
                                  ZeroMode mode = ZeroMode::CellAveraged);

struct LagCovariance {
  long lag_cells = 0;
  double empirical = 0.0;
  double std_error = 0.0;
  double oracle = 0.0;
  double z_score = 0.0;  // (empirical - oracle) / std_error
};

/// Empirical covariance of one noise component between cells `lag` apart
/// along the first axis: each slice contributes its lattice average of
/// F(x) F(x + lag); slice i uses stream (seed, i). Compared with
/// `lattice_covariance`.
std::vector<LagCovariance> lag_covariance_check(const GridSpec& grid, const KernelParams& params,
                                                const std::vector<long>& lags, long n_slices, std::uint64_t seed,
                                                int workers = 1, ZeroMode mode = ZeroMode::CellAveraged);

// Binary field dump: "RZHN", u32 version, i32 k, i32 n, f64 L, f64 dt,
// u64 seed, i32 d, f64 t, then d components of `cells` f64 each in lattice
// order. All little-endian.
struct FieldDump {
  int k = 0;
  int n = 0;
  double length = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  double t = 0.0;
  Eigen::ArrayXXd values;  // cells x d
};

void write_field_dump(std::ostream& out, const FieldDump& dump);
FieldDump read_field_dump(std::istream& in);

}  // namespace rieszheat

#endif  // RIESZHEAT_NOISE_HPP
