#include "lab/lattice.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lab::lattice {

using std::numbers::pi;

void FputParams::validate() const {
  if (n_masses < 2) throw std::invalid_argument("fput: n_masses must be >= 2");
  if (!(dt > 0.0)) throw std::invalid_argument("fput: dt must be positive");
  if (!std::isfinite(alpha)) throw std::invalid_argument("fput: alpha must be finite");
}

std::vector<double> fput_accel(std::span<const double> u, double alpha) {
  if (u.size() < 3) throw std::invalid_argument("fput_accel: need at least 3 entries (N >= 2)");
  if (u.front() != 0.0 || u.back() != 0.0) {
    throw std::invalid_argument("fput_accel: endpoints must be fixed at zero");
  }
  std::vector<double> a(u.size(), 0.0);
  for (std::size_t j = 1; j + 1 < u.size(); ++j) {
    const double right = u[j + 1] - u[j];
    const double left = u[j] - u[j - 1];
    a[j] = right - left + alpha * (right * right - left * left);
  }
  return a;
}

double fput_energy(std::span<const double> u, std::span<const double> udot, double alpha) {
  if (u.size() != udot.size()) throw std::invalid_argument("fput_energy: length mismatch");
  double kinetic = 0.0;
  for (double v : udot) kinetic += 0.5 * v * v;
  double potential = 0.0;
  for (std::size_t j = 0; j + 1 < u.size(); ++j) {
    const double bond = u[j + 1] - u[j];
    potential += 0.5 * bond * bond + alpha / 3.0 * bond * bond * bond;
  }
  return kinetic + potential;
}

std::vector<double> mode_shape(std::size_t n, std::size_t k, double amplitude) {
  std::vector<double> u(n + 1, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    u[j] = amplitude * std::sin(static_cast<double>(j * k) * pi / static_cast<double>(n));
  }
  return u;
}

ModeBasis::ModeBasis(std::size_t n) : n_(n) {
  if (n < 2) throw std::invalid_argument("ModeBasis: N must be >= 2");
  const std::size_t m = n - 1;
  sines_.resize(m * m);
  omega_.resize(m);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 1; k <= m; ++k) {
    omega_[k - 1] = 2.0 * std::sin(static_cast<double>(k) * pi / (2.0 * nd));
    for (std::size_t j = 1; j <= m; ++j) {
      // j*k mod 2N keeps the sine argument small without changing its value.
      sines_[(k - 1) * m + (j - 1)] = std::sin(static_cast<double>((j * k) % (2 * n)) * pi / nd);
    }
  }
}

std::vector<double> ModeBasis::project(std::span<const double> u) const {
  if (u.size() != n_ + 1) throw std::invalid_argument("ModeBasis::project: expected N + 1 entries");
  const std::size_t m = n_ - 1;
  const double norm = std::sqrt(2.0 / static_cast<double>(n_));
  std::vector<double> a(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += u[j + 1] * sines_[k * m + j];
    a[k] = norm * s;
  }
  return a;
}

std::vector<double> ModeBasis::energies(std::span<const double> u, std::span<const double> udot) const {
  if (u.size() != udot.size()) throw std::invalid_argument("mode_energies: length mismatch");
  if (u.size() != n_ + 1) throw std::invalid_argument("mode_energies: expected N + 1 entries");
  if (u.front() != 0.0 || u.back() != 0.0 || udot.front() != 0.0 || udot.back() != 0.0) {
    throw std::invalid_argument("mode_energies: endpoints must be zero");
  }
  const auto a = project(u);
  const auto adot = project(udot);
  std::vector<double> e(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    e[k] = 0.5 * (adot[k] * adot[k] + omega_[k] * omega_[k] * a[k] * a[k]);
  }
  return e;
}

std::vector<double> mode_energies(std::span<const double> u, std::span<const double> udot, std::size_t n) {
  if (u.size() != n + 1 || udot.size() != n + 1) throw std::invalid_argument("mode_energies: length mismatch");
  return ModeBasis(n).energies(u, udot);
}

double ModeEnergySeries::share(std::size_t i, std::size_t mode) const {
  const auto& e = energies.at(i);
  double total = 0.0;
  for (double x : e) total += x;
  return total > 0.0 ? e.at(mode - 1) / total : 0.0;
}

FputChain::FputChain(const FputParams& params, std::size_t init_mode, double amplitude) : params_(params) {
  params_.validate();
  if (init_mode < 1 || init_mode >= params_.n_masses) {
    throw std::invalid_argument("fput: init_mode must lie in [1, N-1]");
  }
  u_ = mode_shape(params_.n_masses, init_mode, amplitude);
  v_.assign(u_.size(), 0.0);
}

void FputChain::step() {
  const double alpha = params_.alpha;
  auto accel = [alpha](const State& u) { return fput_accel(u, alpha); };
  try {
    auto [u, v] = leapfrog_step(accel, u_, v_, params_.dt);
    u_ = std::move(u);
    v_ = std::move(v);
  } catch (const StepFailure& e) {
    throw e.at_step(steps_ + 1);
  }
  ++steps_;
}

void FputChain::set_alpha(double alpha) {
  if (!std::isfinite(alpha)) throw std::invalid_argument("fput: alpha must be finite");
  params_.alpha = alpha;
}

EnergyDriftError::EnergyDriftError(double time, double drift, double threshold)
    : std::runtime_error("fput: relative energy drift " + std::to_string(drift) + " exceeds " +
                         std::to_string(threshold) + " at t=" + std::to_string(time)),
      time_(time),
      drift_(drift) {}

namespace {

std::size_t steps_for(double span, double dt) {
  return static_cast<std::size_t>(std::llround(span / dt));
}

}  // namespace

FputRun fput_simulate(const FputParams& params, std::size_t init_mode, double amplitude, double t_end,
                      double record_dt, double max_drift) {
  if (!(t_end >= 0.0)) throw std::invalid_argument("fput_simulate: t_end must be non-negative");
  if (!(record_dt > 0.0)) throw std::invalid_argument("fput_simulate: record_dt must be positive");
  FputChain chain(params, init_mode, amplitude);
  const ModeBasis basis(params.n_masses);
  const std::size_t record_every = std::max<std::size_t>(1, steps_for(record_dt, params.dt));
  const std::size_t n_steps = steps_for(t_end, params.dt);

  FputRun run;
  run.modes.k_max = basis.modes();
  run.initial_energy = chain.energy();
  auto record = [&] {
    run.history.times.push_back(chain.time());
    run.history.fields.push_back(chain.displacements());
    run.modes.times.push_back(chain.time());
    run.modes.energies.push_back(basis.energies(chain.displacements(), chain.velocities()));
  };
  record();
  const double scale = run.initial_energy > 0.0 ? run.initial_energy : 1.0;
  while (chain.steps() < n_steps) {
    chain.step();
    const double drift = std::abs(chain.energy() - run.initial_energy) / scale;
    run.max_relative_drift = std::max(run.max_relative_drift, drift);
    if (drift > max_drift) throw EnergyDriftError(chain.time(), drift, max_drift);
    if (chain.steps() % record_every == 0) record();
  }
  return run;
}

std::optional<double> recurrence_time(const ModeEnergySeries& series, std::size_t mode, double share) {
  if (series.times.empty()) throw std::invalid_argument("recurrence_time: empty series");
  if (!(share > 0.0 && share < 1.0)) throw std::invalid_argument("recurrence_time: share must lie in (0, 1)");
  if (mode < 1 || mode > series.k_max) throw std::invalid_argument("recurrence_time: mode out of range");
  bool dropped = false;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double s = series.share(i, mode);
    if (!dropped) {
      dropped = s < 0.5 * share;
    } else if (s >= share) {
      return series.times[i];
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// KdV

KdvParams KdvParams::make(double delta, std::size_t n_points, double dt, double length) {
  if (n_points < 5) throw std::invalid_argument("kdv: need at least 5 grid points");
  if (!(length > 0.0)) throw std::invalid_argument("kdv: length must be positive");
  if (!(delta >= 0.0)) throw std::invalid_argument("kdv: delta must be non-negative");
  if (!(dt > 0.0)) throw std::invalid_argument("kdv: dt must be positive");
  KdvParams p{delta, length / static_cast<double>(n_points), dt, length};
  if (delta > 0.0 && dt > p.dx * p.dx * p.dx / (4.0 * delta * delta)) {
    throw std::invalid_argument("kdv: dt exceeds dispersive stability bound dx^3/(4 delta^2)");
  }
  return p;
}

std::size_t KdvParams::points() const {
  return static_cast<std::size_t>(std::llround(length / dx));
}

double KdvParams::max_stable_dt(double vmax) const {
  const double rate = std::abs(vmax) / dx + 4.0 * delta * delta / (dx * dx * dx);
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

namespace {

// dt * (spatial operator) evaluated at grid index i; the caller adds it to
// either v^{n-1} (leapfrog, factor 2 folded in) or v^n (Euler, halved).
inline double zk_increment(std::span<const double> v, std::size_t i, std::size_t n, double adv, double disp) {
  const double vm2 = v[(i + n - 2) % n];
  const double vm1 = v[(i + n - 1) % n];
  const double v0 = v[i];
  const double vp1 = v[(i + 1) % n];
  const double vp2 = v[(i + 2) % n];
  return -adv * (vp1 + v0 + vm1) * (vp1 - vm1) - disp * (vp2 - 2.0 * vp1 + 2.0 * vm1 - vm2);
}

void check_pair(std::span<const double> v, std::span<const double> prev) {
  if (v.size() != prev.size()) throw std::invalid_argument("kdv_step: arrays must have equal length");
  if (v.size() < 5) throw std::invalid_argument("kdv_step: need at least 5 grid points");
}

void require_finite_field(const std::vector<double>& out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) throw StepFailure(i, std::nullopt, "kdv instability");
  }
}

}  // namespace

std::vector<double> kdv_step(std::span<const double> v, std::span<const double> prev, const KdvParams& p,
                             int threads) {
  check_pair(v, prev);
  const std::size_t n = v.size();
  const double adv = p.dt / (3.0 * p.dx);
  const double disp = p.delta * p.delta * p.dt / (p.dx * p.dx * p.dx);
  std::vector<double> out(n);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  const auto ni = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) num_threads(nt) if (n >= 4096)
  for (std::ptrdiff_t i = 0; i < ni; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out[u] = prev[u] + zk_increment(v, u, n, adv, disp);
  }
  require_finite_field(out);
  return out;
}

std::vector<double> kdv_euler_start(std::span<const double> v, const KdvParams& p) {
  check_pair(v, v);
  const std::size_t n = v.size();
  const double adv = 0.5 * p.dt / (3.0 * p.dx);
  const double disp = 0.5 * p.delta * p.delta * p.dt / (p.dx * p.dx * p.dx);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i] + zk_increment(v, i, n, adv, disp);
  require_finite_field(out);
  return out;
}

namespace serial {

std::vector<double> kdv_step(std::span<const double> v, std::span<const double> prev, const KdvParams& p) {
  check_pair(v, prev);
  const std::size_t n = v.size();
  const double adv = p.dt / (3.0 * p.dx);
  const double disp = p.delta * p.delta * p.dt / (p.dx * p.dx * p.dx);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = prev[i] + zk_increment(v, i, n, adv, disp);
  require_finite_field(out);
  return out;
}

}  // namespace serial

KdvSolver::KdvSolver(const KdvParams& params, std::vector<double> init, int threads)
    : params_(params), cur_(std::move(init)), threads_(threads) {
  if (cur_.size() < 5) throw std::invalid_argument("kdv: need at least 5 grid points");
  if (cur_.size() != params_.points()) throw std::invalid_argument("kdv: initial field does not match length/dx");
  double vmax = 0.0;
  for (double x : cur_) {
    if (!std::isfinite(x)) throw std::invalid_argument("kdv: initial field must be finite");
    vmax = std::max(vmax, std::abs(x));
  }
  if (params_.dt > params_.max_stable_dt(vmax)) {
    throw std::invalid_argument("kdv: dt exceeds stability bound 1/(|v|max/dx + 4 delta^2/dx^3) = " +
                                std::to_string(params_.max_stable_dt(vmax)));
  }
}

void KdvSolver::step() {
  try {
    if (steps_ == 0) {
      prev_ = cur_;
      cur_ = kdv_euler_start(prev_, params_);
    } else {
      auto next = kdv_step(cur_, prev_, params_, threads_);
      prev_ = std::move(cur_);
      cur_ = std::move(next);
    }
  } catch (const StepFailure& e) {
    throw e.at_step(steps_ + 1);
  }
  ++steps_;
}

void KdvSolver::set_delta(double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("kdv: delta must be non-negative");
  KdvParams trial = params_;
  trial.delta = delta;
  double vmax = 0.0;
  for (double x : cur_) vmax = std::max(vmax, std::abs(x));
  if (params_.dt > trial.max_stable_dt(vmax)) throw std::invalid_argument("kdv: delta breaks the stability bound");
  params_ = trial;
}

FieldHistory kdv_simulate(const KdvParams& p, std::vector<double> init, double t_end, double record_dt, int threads) {
  if (!(t_end >= 0.0)) throw std::invalid_argument("kdv_simulate: t_end must be non-negative");
  if (!(record_dt > 0.0)) throw std::invalid_argument("kdv_simulate: record_dt must be positive");
  KdvSolver solver(p, std::move(init), threads);
  const std::size_t record_every = std::max<std::size_t>(1, steps_for(record_dt, p.dt));
  const std::size_t n_steps = steps_for(t_end, p.dt);
  FieldHistory h;
  h.times.push_back(0.0);
  h.fields.push_back(solver.field());
  while (solver.steps() < n_steps) {
    solver.step();
    if (solver.steps() % record_every == 0) {
      h.times.push_back(solver.time());
      h.fields.push_back(solver.field());
    }
  }
  return h;
}

std::vector<double> cosine_profile(std::size_t n_points, double length) {
  std::vector<double> v(n_points);
  const double dx = length / static_cast<double>(n_points);
  for (std::size_t i = 0; i < n_points; ++i) v[i] = std::cos(pi * static_cast<double>(i) * dx);
  return v;
}

std::vector<double> soliton_profile(std::size_t n_points, double length, double delta, double speed, double x0) {
  std::vector<double> v(n_points);
  const double dx = length / static_cast<double>(n_points);
  const double k = std::sqrt(speed) / (2.0 * delta);
  for (std::size_t i = 0; i < n_points; ++i) {
    double d = static_cast<double>(i) * dx - x0;
    d -= length * std::round(d / length);
    const double s = 1.0 / std::cosh(k * d);
    v[i] = 3.0 * speed * s * s;
  }
  return v;
}

std::vector<Pulse> detect_pulses(std::span<const double> field, double dx, double min_height) {
  if (!(min_height > 0.0)) throw std::invalid_argument("detect_pulses: min_height must be positive");
  std::vector<Pulse> out;
  const std::size_t n = field.size();
  if (n < 3) return out;
  const double length = dx * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = field[(i + n - 1) % n];
    const double c = field[i];
    const double r = field[(i + 1) % n];
    if (!(c > l && c >= r) || c < min_height) continue;
    const double curv = l - 2.0 * c + r;
    double offset = 0.0;
    double height = c;
    if (curv < 0.0) {
      offset = 0.5 * (l - r) / curv;
      height = c - 0.25 * (l - r) * offset;
    }
    double pos = (static_cast<double>(i) + offset) * dx;
    if (pos < 0.0) pos += length;
    if (pos >= length) pos -= length;
    out.push_back({pos, height});
  }
  std::sort(out.begin(), out.end(), [](const Pulse& a, const Pulse& b) { return a.position < b.position; });
  return out;
}

}  // namespace lab::lattice
