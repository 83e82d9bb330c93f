#include "lab/numerics.hpp"

namespace lab {

namespace {

std::string failure_message(std::size_t component, std::optional<std::size_t> step, const std::string& detail) {
  std::string msg = "non-finite value in state component " + std::to_string(component);
  if (step) msg += " at step " + std::to_string(*step);
  if (!detail.empty()) msg += " (" + detail + ")";
  return msg;
}

}  // namespace

StepFailure::StepFailure(std::size_t component, std::optional<std::size_t> step, const std::string& detail)
    : std::runtime_error(failure_message(component, step, detail)),
      component_(component),
      step_(step),
      detail_(detail) {}

void require_finite(const State& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i])) throw StepFailure(i, std::nullopt);
  }
}

std::optional<Crossing> segment_crossing(double t0, const State& s0, double t1, const State& s1,
                                         const SectionSpec& section) {
  const std::size_t c = section.coordinate;
  if (c >= s0.size() || c >= s1.size()) {
    throw std::invalid_argument("section coordinate " + std::to_string(c) + " out of range");
  }
  const double a = s0[c] - section.level;
  const double b = s1[c] - section.level;
  const bool up = a < 0.0 && b >= 0.0;
  const bool down = a > 0.0 && b <= 0.0;
  const bool hit = (section.direction == Direction::Up && up) || (section.direction == Direction::Down && down) ||
                   (section.direction == Direction::Both && (up || down));
  if (!hit) return std::nullopt;

  const double f = a / (a - b);
  Crossing out;
  out.time = t0 + f * (t1 - t0);
  out.state.resize(s0.size());
  for (std::size_t i = 0; i < s0.size(); ++i) out.state[i] = s0[i] + f * (s1[i] - s0[i]);
  out.state[c] = section.level;
  return out;
}

std::vector<Crossing> poincare_crossings(const Trajectory& traj, const SectionSpec& section) {
  std::vector<Crossing> out;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (auto x = segment_crossing(traj.times[i - 1], traj.states[i - 1], traj.times[i], traj.states[i], section)) {
      out.push_back(std::move(*x));
    }
  }
  return out;
}

}  // namespace lab
