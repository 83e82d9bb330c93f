#pragma once

// Two-morphogen reaction-diffusion system on a periodic grid:
//   u_t = u (v - 1) + A lap(u)
//   v_t = 16 - u v + B lap(w),   w = v (default) or w = u (verbatim coupling)
// Forward Euler in time, 5-point Laplacian in space.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace lab::turing {

struct Field2D {
  std::size_t nx = 0;  // columns
  std::size_t ny = 0;  // rows
  double dx = 1.0;
  std::vector<double> values;  // row-major, ny rows of nx

  Field2D() = default;
  Field2D(std::size_t nx_, std::size_t ny_, double dx_, double fill = 0.0)
      : nx(nx_), ny(ny_), dx(dx_), values(nx_ * ny_, fill) {}

  double& at(std::size_t row, std::size_t col) { return values[row * nx + col]; }
  double at(std::size_t row, std::size_t col) const { return values[row * nx + col]; }
  bool same_shape(const Field2D& o) const { return nx == o.nx && ny == o.ny; }
};

enum class Coupling {
  Inhibitor,  // B lap(v)
  Verbatim,   // B lap(u)
};

std::optional<Coupling> parse_coupling(std::string_view name);
std::string_view to_string(Coupling c);

inline constexpr double kSteadyU = 16.0;
inline constexpr double kSteadyV = 1.0;

struct TuringParams {
  double A = 0.1;
  double B = 4.0;
  double dt = 0.02;
  double dx = 1.0;
  std::size_t nx = 64;
  std::size_t ny = 64;
  Coupling coupling = Coupling::Inhibitor;

  /// Shape and sign checks, dt <= dx^2 / (4 max(A, B)), and the forward-Euler
  /// amplification of every discrete Fourier mode about (16, 1) at most 1.
  void validate() const;
};

/// One forward-Euler step, rows updated in parallel (bit-identical to the serial path).
std::pair<Field2D, Field2D> turing_step(const Field2D& u, const Field2D& v, const TuringParams& p, int threads = 0);

namespace serial {
std::pair<Field2D, Field2D> turing_step(const Field2D& u, const Field2D& v, const TuringParams& p);
}

/// Uniform noise in [-amp, amp] from a 64-bit Mersenne Twister; the mapping
/// from raw draws to doubles is fixed here so runs are portable.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed);
  double next(double amp);

 private:
  std::mt19937_64 engine_;
};

/// Homogeneous (16, 1) with seeded noise added to u only.
std::pair<Field2D, Field2D> initial_state(const TuringParams& p, std::uint64_t seed, double noise_amp);

struct Snapshot {
  std::size_t step = 0;
  Field2D u;
  Field2D v;
};

/// Snapshot at step 0 and at every multiple of record_every up to n_steps.
std::vector<Snapshot> turing_simulate(const TuringParams& p, std::uint64_t seed, double noise_amp, std::size_t n_steps,
                                      std::size_t record_every, int threads = 0);

struct PatternStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
};

PatternStats pattern_stats(const Field2D& f);

// Linear stability about (16, 1) --------------------------------------------

/// Distinct values of -eigenvalue of the periodic 5-point Laplacian, ascending.
std::vector<double> laplacian_wavenumbers(std::size_t nx, std::size_t ny, double dx);

/// Largest real part of the eigenvalues of the linearised system for mode k2.
double linear_growth_rate(double A, double B, double k2, Coupling c);

/// Spectral radius of I + dt J_k.
double euler_amplification(double A, double B, double dt, double k2, Coupling c);

struct StabilityScan {
  double max_growth = 0.0;
  double A = 0.0;  // arguments of the maximum
  double B = 0.0;
  double k2 = 0.0;
};

/// Brute-force scan of linear_growth_rate over a parameter grid and every
/// discrete wavenumber of the given mesh.
StabilityScan scan_instability(const std::vector<double>& As, const std::vector<double>& Bs, std::size_t nx,
                               std::size_t ny, double dx, Coupling c);

}  // namespace lab::turing
