#pragma once

// Lorenz convection model and the Hénon–Heiles galactic-orbit Hamiltonian.

#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "lab/numerics.hpp"

namespace lab::flows {

struct LorenzParams {
  double sigma = 10.0;
  double r = 28.0;
  double b = 8.0 / 3.0;
};

/// (sigma (y - x), r x - y - x z, x y - b z)
State lorenz_field(const LorenzParams& p, const State& s);

/// Fixed points: the origin, plus (±q, ±q, r - 1) with q = sqrt(b (r - 1)) when r > 1.
std::vector<State> lorenz_fixed_points(const LorenzParams& p);

/// Integrates `transient_steps` RK4 steps, discards them, then records
/// `sample_steps` further steps (sample_steps + 1 samples in total).
Trajectory lorenz_attractor(const LorenzParams& p, const State& state0, double dt, std::size_t transient_steps,
                            std::size_t sample_steps);

struct SeparationSample {
  double time = 0.0;
  double log10_separation = 0.0;  // -infinity when the two states coincide
};

/// Twin integrations from state0 and state0 + (delta0, 0, 0), no renormalisation.
/// Returns n_steps + 1 samples starting at t = 0.
std::vector<SeparationSample> separation_growth(const LorenzParams& p, const State& state0, double delta0, double dt,
                                                std::size_t n_steps);

struct HHState {
  double x = 0.0;
  double y = 0.0;
  double px = 0.0;
  double py = 0.0;

  State to_state() const { return {x, y, px, py}; }
  static HHState from_state(const State& s) { return {s.at(0), s.at(1), s.at(2), s.at(3)}; }
};

/// H = (px^2 + py^2)/2 + (x^2 + y^2)/2 + x^2 y - y^3/3
double hh_energy(const HHState& s);

/// Hamilton's equations for the state (x, y, px, py).
State hh_field(const State& s);

/// Energy above which orbits may leave the triangular potential well.
inline constexpr double kHHEscapeEnergy = 1.0 / 6.0;

enum class SeedRule {
  Grid,    // ceil(sqrt(n)) x ceil(sqrt(n)) lattice over the (y, py) box, row-major, first n cells
  YLine,   // py = 0, y evenly spaced strictly inside the allowed interval
  PyLine,  // y = 0, py evenly spaced strictly inside (-sqrt(2E), sqrt(2E))
};

std::optional<SeedRule> parse_seed_rule(std::string_view name);
std::string_view to_string(SeedRule rule);

/// Phase point on x = 0 with the given (y, py) and px > 0 solved from the
/// energy; empty when the radicand is negative.
std::optional<HHState> hh_seed(double energy, double y, double py);

/// Candidate (y, py) pairs for a seed rule (feasibility not yet checked).
std::vector<std::pair<double, double>> hh_seed_candidates(double energy, std::size_t n_seeds, SeedRule rule);

struct SectionPoint {
  double y = 0.0;
  double py = 0.0;
  std::size_t seed = 0;
};

struct PoincareSection {
  std::vector<SectionPoint> points;
  double energy = 0.0;
  std::size_t seed_count = 0;
  std::size_t skipped_seeds = 0;  // negative radicand
  std::size_t escaped_seeds = 0;
};

struct SectionOptions {
  double escape_radius = 10.0;
  /// Per-seed step budget, as a multiple of n_crossings / dt.
  double max_time_per_crossing = 200.0;
  int threads = 0;  // 0: OpenMP default
};

/// Collects (y, py) at crossings of x = 0 with px > 0, n_crossings per seed.
/// Seeds are integrated in parallel and merged in seed order.
PoincareSection hh_section(double energy, std::size_t n_seeds, std::size_t n_crossings, double dt, SeedRule rule,
                           const SectionOptions& opts = {});

/// Crossings of a single orbit; `escaped` is set when the orbit leaves the well.
std::vector<SectionPoint> hh_orbit_section(const HHState& seed, std::size_t seed_index, std::size_t n_crossings,
                                           double dt, const SectionOptions& opts, bool& escaped);

namespace serial {
PoincareSection hh_section(double energy, std::size_t n_seeds, std::size_t n_crossings, double dt, SeedRule rule,
                           const SectionOptions& opts = {});
}

}  // namespace lab::flows
