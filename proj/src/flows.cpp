#include "lab/flows.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

namespace lab::flows {

State lorenz_field(const LorenzParams& p, const State& s) {
  if (s.size() != 3) throw std::invalid_argument("lorenz_field: state must have dimension 3");
  const double x = s[0], y = s[1], z = s[2];
  return {p.sigma * (y - x), p.r * x - y - x * z, x * y - p.b * z};
}

std::vector<State> lorenz_fixed_points(const LorenzParams& p) {
  std::vector<State> out{{0.0, 0.0, 0.0}};
  if (p.r > 1.0) {
    const double q = std::sqrt(p.b * (p.r - 1.0));
    out.push_back({q, q, p.r - 1.0});
    out.push_back({-q, -q, p.r - 1.0});
  }
  return out;
}

Trajectory lorenz_attractor(const LorenzParams& p, const State& state0, double dt, std::size_t transient_steps,
                            std::size_t sample_steps) {
  if (!(dt > 0.0 && dt <= 0.05)) throw std::invalid_argument("lorenz_attractor: dt must lie in (0, 0.05]");
  auto field = [&p](const State& s) { return lorenz_field(p, s); };
  State s = state0;
  for (std::size_t i = 1; i <= transient_steps; ++i) {
    try {
      s = rk4_step(field, s, dt);
    } catch (const StepFailure& e) {
      throw e.at_step(i);
    }
  }
  Trajectory traj;
  try {
    traj = integrate(field, s, dt, sample_steps, 1);
  } catch (const StepFailure& e) {
    throw e.at_step(transient_steps + e.step().value_or(0));
  }
  const double t0 = static_cast<double>(transient_steps) * dt;
  for (double& t : traj.times) t += t0;
  return traj;
}

std::vector<SeparationSample> separation_growth(const LorenzParams& p, const State& state0, double delta0, double dt,
                                                std::size_t n_steps) {
  if (delta0 < 0.0) throw std::invalid_argument("separation_growth: delta0 must be non-negative");
  if (state0.size() != 3) throw std::invalid_argument("separation_growth: state must have dimension 3");
  auto field = [&p](const State& s) { return lorenz_field(p, s); };
  State a = state0;
  State b = state0;
  b[0] += delta0;

  auto log_sep = [](const State& u, const State& v) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) d2 += (u[i] - v[i]) * (u[i] - v[i]);
    return d2 == 0.0 ? -std::numeric_limits<double>::infinity() : 0.5 * std::log10(d2);
  };

  std::vector<SeparationSample> out;
  out.reserve(n_steps + 1);
  out.push_back({0.0, log_sep(a, b)});
  for (std::size_t i = 1; i <= n_steps; ++i) {
    try {
      a = rk4_step(field, a, dt);
      b = rk4_step(field, b, dt);
    } catch (const StepFailure& e) {
      throw e.at_step(i);
    }
    out.push_back({static_cast<double>(i) * dt, log_sep(a, b)});
  }
  return out;
}

double hh_energy(const HHState& s) {
  return 0.5 * (s.px * s.px + s.py * s.py) + 0.5 * (s.x * s.x + s.y * s.y) + s.x * s.x * s.y -
         s.y * s.y * s.y / 3.0;
}

State hh_field(const State& s) {
  const double x = s[0], y = s[1];
  return {s[2], s[3], -x - 2.0 * x * y, -y - x * x + y * y};
}

std::optional<SeedRule> parse_seed_rule(std::string_view name) {
  if (name == "grid") return SeedRule::Grid;
  if (name == "y-line") return SeedRule::YLine;
  if (name == "py-line") return SeedRule::PyLine;
  return std::nullopt;
}

std::string_view to_string(SeedRule rule) {
  switch (rule) {
    case SeedRule::Grid: return "grid";
    case SeedRule::YLine: return "y-line";
    case SeedRule::PyLine: return "py-line";
  }
  return "grid";
}

std::optional<HHState> hh_seed(double energy, double y, double py) {
  const double radicand = 2.0 * energy - py * py - y * y + 2.0 / 3.0 * y * y * y;
  if (radicand < 0.0) return std::nullopt;
  return HHState{0.0, y, std::sqrt(radicand), py};
}

namespace {

// Root of y^2/2 - y^3/3 = E on [lo, hi], where the left side is monotone.
double well_edge(double energy, double lo, double hi) {
  auto g = [energy](double y) { return 0.5 * y * y - y * y * y / 3.0 - energy; };
  double glo = g(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void validate_section_args(double energy, std::size_t n_seeds, double dt) {
  if (!(energy > 0.0 && energy <= kHHEscapeEnergy)) {
    throw std::invalid_argument("hh_section: energy must lie in (0, 1/6]");
  }
  if (n_seeds == 0) throw std::invalid_argument("hh_section: n_seeds must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("hh_section: dt must be positive");
}

}  // namespace

std::vector<std::pair<double, double>> hh_seed_candidates(double energy, std::size_t n_seeds, SeedRule rule) {
  const double y_lo = well_edge(energy, -2.0, 0.0);
  const double y_hi = well_edge(energy, 0.0, 1.0);
  const double p_max = std::sqrt(2.0 * energy);
  std::vector<std::pair<double, double>> out;
  out.reserve(n_seeds);
  const auto n = static_cast<double>(n_seeds);
  switch (rule) {
    case SeedRule::YLine:
      for (std::size_t i = 0; i < n_seeds; ++i) {
        out.emplace_back(y_lo + (static_cast<double>(i) + 1.0) * (y_hi - y_lo) / (n + 1.0), 0.0);
      }
      break;
    case SeedRule::PyLine:
      for (std::size_t i = 0; i < n_seeds; ++i) {
        out.emplace_back(0.0, p_max * (2.0 * (static_cast<double>(i) + 1.0) / (n + 1.0) - 1.0));
      }
      break;
    case SeedRule::Grid: {
      const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(n)));
      const auto kd = static_cast<double>(k);
      for (std::size_t idx = 0; idx < n_seeds; ++idx) {
        const double i = static_cast<double>(idx / k);
        const double j = static_cast<double>(idx % k);
        const double py = -p_max + (i + 1.0) * 2.0 * p_max / (kd + 1.0);
        const double y = y_lo + (j + 1.0) * (y_hi - y_lo) / (kd + 1.0);
        out.emplace_back(y, py);
      }
      break;
    }
  }
  return out;
}

std::vector<SectionPoint> hh_orbit_section(const HHState& seed, std::size_t seed_index, std::size_t n_crossings,
                                           double dt, const SectionOptions& opts, bool& escaped) {
  escaped = false;
  std::vector<SectionPoint> out;
  if (n_crossings == 0) return out;
  out.reserve(n_crossings);

  const SectionSpec section{0, 0.0, Direction::Up};
  const auto max_steps =
      static_cast<std::size_t>(std::ceil(opts.max_time_per_crossing * static_cast<double>(n_crossings) / dt));
  State s = seed.to_state();
  double t = 0.0;
  for (std::size_t step = 1; step <= max_steps && out.size() < n_crossings; ++step) {
    State next;
    try {
      next = rk4_step(hh_field, s, dt);
    } catch (const StepFailure& e) {
      throw e.at_step(step);
    }
    const double tn = static_cast<double>(step) * dt;
    if (auto c = segment_crossing(t, s, tn, next, section); c && c->state[2] > 0.0) {
      out.push_back({c->state[1], c->state[3], seed_index});
    }
    if (std::abs(next[0]) > opts.escape_radius || std::abs(next[1]) > opts.escape_radius) {
      escaped = true;
      break;
    }
    s = std::move(next);
    t = tn;
  }
  return out;
}

namespace {

struct SeedResult {
  std::vector<SectionPoint> points;
  bool feasible = false;
  bool escaped = false;
};

SeedResult run_seed(double energy, const std::pair<double, double>& yp, std::size_t index, std::size_t n_crossings,
                    double dt, const SectionOptions& opts) {
  SeedResult r;
  const auto seed = hh_seed(energy, yp.first, yp.second);
  if (!seed) return r;
  r.feasible = true;
  r.points = hh_orbit_section(*seed, index, n_crossings, dt, opts, r.escaped);
  return r;
}

PoincareSection assemble(double energy, std::size_t n_seeds, std::vector<SeedResult>& results) {
  PoincareSection out;
  out.energy = energy;
  out.seed_count = n_seeds;
  for (auto& r : results) {
    if (!r.feasible) {
      ++out.skipped_seeds;
      continue;
    }
    if (r.escaped) ++out.escaped_seeds;
    out.points.insert(out.points.end(), r.points.begin(), r.points.end());
  }
  return out;
}

}  // namespace

PoincareSection hh_section(double energy, std::size_t n_seeds, std::size_t n_crossings, double dt, SeedRule rule,
                           const SectionOptions& opts) {
  validate_section_args(energy, n_seeds, dt);
  const auto seeds = hh_seed_candidates(energy, n_seeds, rule);
  std::vector<SeedResult> results(seeds.size());
  std::exception_ptr failure;
  const int threads = opts.threads > 0 ? opts.threads : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(seeds.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      results[i] = run_seed(energy, seeds[i], static_cast<std::size_t>(i), n_crossings, dt, opts);
    } catch (...) {
#pragma omp critical(lab_hh_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return assemble(energy, n_seeds, results);
}

namespace serial {

PoincareSection hh_section(double energy, std::size_t n_seeds, std::size_t n_crossings, double dt, SeedRule rule,
                           const SectionOptions& opts) {
  validate_section_args(energy, n_seeds, dt);
  const auto seeds = hh_seed_candidates(energy, n_seeds, rule);
  std::vector<SeedResult> results;
  results.reserve(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) results.push_back(run_seed(energy, seeds[i], i, n_crossings, dt, opts));
  return assemble(energy, n_seeds, results);
}

}  // namespace serial

}  // namespace lab::flows
