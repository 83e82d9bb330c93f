#pragma once

// Nonlinear lattice waves: the FPUT chain with fixed ends and the KdV equation
// on a periodic domain (Zabusky–Kruskal leapfrog).

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lab/numerics.hpp"

namespace lab::lattice {

// ---------------------------------------------------------------------------
// FPUT chain. Arrays hold N + 1 displacements u_0..u_N with u_0 = u_N = 0.

struct FputParams {
  std::size_t n_masses = 32;  // N: number of spring segments; N - 1 moving masses
  double alpha = 0.25;
  double dt = 0.05;

  void validate() const;
};

/// Accelerations u_{j+1} - 2u_j + u_{j-1} + alpha[(u_{j+1}-u_j)^2 - (u_j-u_{j-1})^2],
/// zero at the two fixed ends.
std::vector<double> fput_accel(std::span<const double> u, double alpha);

/// Kinetic + harmonic + cubic (alpha/3 sum of bond^3) energy.
double fput_energy(std::span<const double> u, std::span<const double> udot, double alpha);

/// u_j = amplitude * sin(j k pi / N), j = 0..N.
std::vector<double> mode_shape(std::size_t n, std::size_t k, double amplitude);

/// Orthonormal sine basis for a chain of N segments, with mode frequencies
/// omega_k = 2 sin(k pi / 2N).
class ModeBasis {
 public:
  explicit ModeBasis(std::size_t n);

  std::size_t segments() const noexcept { return n_; }
  std::size_t modes() const noexcept { return n_ - 1; }
  double omega(std::size_t k) const { return omega_.at(k - 1); }

  /// a_k = sqrt(2/N) sum_j u_j sin(j k pi / N) for k = 1..N-1.
  std::vector<double> project(std::span<const double> u) const;

  /// E_k = (adot_k^2 + omega_k^2 a_k^2) / 2 for k = 1..N-1.
  std::vector<double> energies(std::span<const double> u, std::span<const double> udot) const;

 private:
  std::size_t n_;
  std::vector<double> sines_;  // (N-1) x (N-1), row k-1, column j-1
  std::vector<double> omega_;
};

std::vector<double> mode_energies(std::span<const double> u, std::span<const double> udot, std::size_t n);

struct ModeEnergySeries {
  std::vector<double> times;
  std::vector<std::vector<double>> energies;  // energies[i][k-1] = E_k at times[i]
  std::size_t k_max = 0;

  /// E_mode / sum_k E_k at sample i (0 when the chain is at rest).
  double share(std::size_t i, std::size_t mode) const;
};

struct FieldHistory {
  std::vector<double> times;
  std::vector<std::vector<double>> fields;
};

/// Leapfrog state machine for the chain, shared by batch runs and live sessions.
class FputChain {
 public:
  FputChain(const FputParams& params, std::size_t init_mode, double amplitude);

  void step();
  void set_alpha(double alpha);

  const FputParams& params() const noexcept { return params_; }
  const std::vector<double>& displacements() const noexcept { return u_; }
  const std::vector<double>& velocities() const noexcept { return v_; }
  std::size_t steps() const noexcept { return steps_; }
  double time() const noexcept { return static_cast<double>(steps_) * params_.dt; }
  double energy() const { return fput_energy(u_, v_, params_.alpha); }

 private:
  FputParams params_;
  std::vector<double> u_;
  std::vector<double> v_;
  std::size_t steps_ = 0;
};

struct FputRun {
  FieldHistory history;
  ModeEnergySeries modes;
  double initial_energy = 0.0;
  double max_relative_drift = 0.0;
};

/// Raised when total-energy drift exceeds the allowed threshold.
class EnergyDriftError : public std::runtime_error {
 public:
  EnergyDriftError(double time, double drift, double threshold);
  double time() const noexcept { return time_; }
  double drift() const noexcept { return drift_; }

 private:
  double time_;
  double drift_;
};

/// Integrates from u_j = amplitude sin(j m pi / N) at rest, recording
/// displacements and mode energies every record_dt.
FputRun fput_simulate(const FputParams& params, std::size_t init_mode, double amplitude, double t_end,
                      double record_dt, double max_drift = 1e-4);

/// First time after the share of `mode` first dropped below share/2 at which
/// it again reaches `share`; empty if that never happens.
std::optional<double> recurrence_time(const ModeEnergySeries& series, std::size_t mode, double share = 0.95);

// ---------------------------------------------------------------------------
// KdV: v_t + v v_x + delta^2 v_xxx = 0 on a periodic interval.

struct KdvParams {
  double delta = 0.022;
  double dx = 2.0 / 256.0;
  double dt = 1e-4;
  double length = 2.0;

  /// Builds params for n grid points and checks dt <= dx^3 / (4 delta^2).
  static KdvParams make(double delta, std::size_t n_points, double dt, double length = 2.0);

  std::size_t points() const;
  /// Largest admissible dt for a field bounded by vmax.
  double max_stable_dt(double vmax) const;
};

/// One Zabusky–Kruskal leapfrog step: returns v^{n+1} from v^n and v^{n-1}.
std::vector<double> kdv_step(std::span<const double> v, std::span<const double> prev, const KdvParams& p,
                             int threads = 0);

/// Forward-Euler start: v^1 from v^0 using the same spatial operator.
std::vector<double> kdv_euler_start(std::span<const double> v, const KdvParams& p);

namespace serial {
std::vector<double> kdv_step(std::span<const double> v, std::span<const double> prev, const KdvParams& p);
}

/// Three-level time stepper with a forward-Euler bootstrap.
class KdvSolver {
 public:
  KdvSolver(const KdvParams& params, std::vector<double> init, int threads = 0);

  void step();
  /// Changes delta between steps; rejects values that break the stability bound.
  void set_delta(double delta);

  const std::vector<double>& field() const noexcept { return cur_; }
  const KdvParams& params() const noexcept { return params_; }
  std::size_t steps() const noexcept { return steps_; }
  double time() const noexcept { return static_cast<double>(steps_) * params_.dt; }

 private:
  KdvParams params_;
  std::vector<double> prev_;
  std::vector<double> cur_;
  std::size_t steps_ = 0;
  int threads_;
};

FieldHistory kdv_simulate(const KdvParams& p, std::vector<double> init, double t_end, double record_dt,
                          int threads = 0);

/// v_i = cos(pi x_i), x_i = i dx on [0, length).
std::vector<double> cosine_profile(std::size_t n_points, double length = 2.0);

/// Solitary wave 3c sech^2(sqrt(c) (x - x0) / (2 delta)) on the periodic grid
/// (nearest periodic image).
std::vector<double> soliton_profile(std::size_t n_points, double length, double delta, double speed, double x0);

struct Pulse {
  double position = 0.0;
  double height = 0.0;
};

/// Local maxima above min_height on a periodic field, refined by a parabola
/// through the peak sample and its neighbours; sorted by position.
std::vector<Pulse> detect_pulses(std::span<const double> field, double dx, double min_height);

}  // namespace lab::lattice
