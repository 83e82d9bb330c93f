#pragma once

// Fixed-step integrators and hyperplane-section detection shared by the
// continuous-time experiments. Everything here is a pure function of its
// arguments.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lab {

using State = std::vector<double>;

/// Raised when an integrator produces a non-finite component.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(std::size_t component, std::optional<std::size_t> step, const std::string& detail = {});

  std::size_t component() const noexcept { return component_; }
  std::optional<std::size_t> step() const noexcept { return step_; }

  /// Same failure, tagged with the index of the step that produced it.
  StepFailure at_step(std::size_t step) const { return StepFailure(component_, step, detail_); }

 private:
  std::size_t component_;
  std::optional<std::size_t> step_;
  std::string detail_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
  void push(double t, State s) {
    times.push_back(t);
    states.push_back(std::move(s));
  }
};

enum class Direction { Down = -1, Both = 0, Up = 1 };

struct SectionSpec {
  std::size_t coordinate = 0;
  double level = 0.0;
  Direction direction = Direction::Up;
};

struct Crossing {
  double time = 0.0;
  State state;
};

/// Throws StepFailure naming the first non-finite component.
void require_finite(const State& s);

namespace detail {

inline void axpy(State& out, const State& base, double h, const State& k) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = base[i] + h * k[i];
}

inline void require_same_dim(const State& a, const State& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace detail

/// Classical fourth-order Runge-Kutta step for ds/dt = field(s).
template <class Field>
State rk4_step(Field&& field, const State& s, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  if (s.empty()) throw std::invalid_argument("rk4_step: empty state");
  const State k1 = field(s);
  detail::require_same_dim(s, k1, "rk4_step");
  State tmp(s.size());
  detail::axpy(tmp, s, 0.5 * dt, k1);
  const State k2 = field(tmp);
  detail::axpy(tmp, s, 0.5 * dt, k2);
  const State k3 = field(tmp);
  detail::axpy(tmp, s, dt, k3);
  const State k4 = field(tmp);
  State out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  require_finite(out);
  return out;
}

/// Velocity-Verlet step. `accel` maps positions to accelerations. A negative
/// dt runs the scheme backwards, which undoes a forward step to round-off.
template <class Accel>
std::pair<State, State> leapfrog_step(Accel&& accel, const State& x, const State& v, double dt) {
  detail::require_same_dim(x, v, "leapfrog_step");
  const State a0 = accel(x);
  detail::require_same_dim(x, a0, "leapfrog_step");
  State vh(v.size());
  detail::axpy(vh, v, 0.5 * dt, a0);
  State xn(x.size());
  detail::axpy(xn, x, dt, vh);
  const State a1 = accel(xn);
  State vn(v.size());
  detail::axpy(vn, vh, 0.5 * dt, a1);
  require_finite(xn);
  require_finite(vn);
  return {std::move(xn), std::move(vn)};
}

/// Fixed-step RK4 from t=0, keeping every `record_every`-th state
/// (floor(n_steps / record_every) + 1 samples, the first being state0).
template <class Field>
Trajectory integrate(Field&& field, const State& state0, double dt, std::size_t n_steps,
                     std::size_t record_every = 1) {
  if (record_every == 0) throw std::invalid_argument("integrate: record_every must be >= 1");
  Trajectory traj;
  traj.times.reserve(n_steps / record_every + 1);
  traj.states.reserve(n_steps / record_every + 1);
  traj.push(0.0, state0);
  State s = state0;
  for (std::size_t step = 1; step <= n_steps; ++step) {
    try {
      s = rk4_step(field, s, dt);
    } catch (const StepFailure& e) {
      throw e.at_step(step);
    }
    if (step % record_every == 0) traj.push(static_cast<double>(step) * dt, s);
  }
  return traj;
}

/// Linear-interpolated crossing of the segment (t0,s0)-(t1,s1) through the
/// section hyperplane, if the segment straddles it in the requested direction.
/// A segment counts as crossing when it starts strictly on one side and ends
/// on or past the level, so a sample lying exactly on the level is reported once.
std::optional<Crossing> segment_crossing(double t0, const State& s0, double t1, const State& s1,
                                         const SectionSpec& section);

std::vector<Crossing> poincare_crossings(const Trajectory& traj, const SectionSpec& section);

}  // namespace lab
