#include "lab/turing.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "lab/numerics.hpp"

namespace lab::turing {

std::optional<Coupling> parse_coupling(std::string_view name) {
  if (name == "inhibitor") return Coupling::Inhibitor;
  if (name == "verbatim") return Coupling::Verbatim;
  return std::nullopt;
}

std::string_view to_string(Coupling c) { return c == Coupling::Inhibitor ? "inhibitor" : "verbatim"; }

void TuringParams::validate() const {
  if (nx < 8 || ny < 8) throw std::invalid_argument("turing: nx and ny must be >= 8");
  if (!(A >= 0.0 && B >= 0.0)) throw std::invalid_argument("turing: diffusion coefficients must be non-negative");
  if (!(dx > 0.0)) throw std::invalid_argument("turing: dx must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("turing: dt must be positive");
  const double dmax = std::max({A, B, 1e-12});
  if (dt > dx * dx / (4.0 * dmax)) throw std::invalid_argument("turing: dt exceeds dx^2 / (4 max(A, B))");
  for (double k2 : laplacian_wavenumbers(nx, ny, dx)) {
    const double amp = euler_amplification(A, B, dt, k2, coupling);
    if (amp > 1.0 + 1e-12) {
      throw std::invalid_argument("turing: forward Euler amplifies Fourier mode k^2=" + std::to_string(k2) +
                                  " by " + std::to_string(amp) + "; reduce dt");
    }
  }
}

namespace {

void check_fields(const Field2D& u, const Field2D& v, const TuringParams& p) {
  if (!u.same_shape(v)) throw std::invalid_argument("turing_step: u and v shapes differ");
  if (u.nx != p.nx || u.ny != p.ny) throw std::invalid_argument("turing_step: field shape does not match params");
}

inline double lap(const Field2D& f, std::size_t r, std::size_t c, double inv_dx2) {
  const std::size_t nx = f.nx, ny = f.ny;
  const std::size_t up = (r + ny - 1) % ny, down = (r + 1) % ny;
  const std::size_t left = (c + nx - 1) % nx, right = (c + 1) % nx;
  return (f.at(up, c) + f.at(down, c) + f.at(r, left) + f.at(r, right) - 4.0 * f.at(r, c)) * inv_dx2;
}

void update_row(const Field2D& u, const Field2D& v, const TuringParams& p, Field2D& un, Field2D& vn, std::size_t r) {
  const double inv_dx2 = 1.0 / (p.dx * p.dx);
  const Field2D& w = p.coupling == Coupling::Inhibitor ? v : u;
  for (std::size_t c = 0; c < u.nx; ++c) {
    const double uu = u.at(r, c);
    const double vv = v.at(r, c);
    un.at(r, c) = uu + p.dt * (uu * (vv - 1.0) + p.A * lap(u, r, c, inv_dx2));
    vn.at(r, c) = vv + p.dt * (16.0 - uu * vv + p.B * lap(w, r, c, inv_dx2));
  }
}

void require_finite_fields(const Field2D& u, const Field2D& v) {
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    if (!std::isfinite(u.values[i]) || !std::isfinite(v.values[i])) {
      throw StepFailure(i, std::nullopt, "turing instability");
    }
  }
}

}  // namespace

std::pair<Field2D, Field2D> turing_step(const Field2D& u, const Field2D& v, const TuringParams& p, int threads) {
  check_fields(u, v, p);
  Field2D un(u.nx, u.ny, u.dx), vn(v.nx, v.ny, v.dx);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  const auto rows = static_cast<std::ptrdiff_t>(u.ny);
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t r = 0; r < rows; ++r) update_row(u, v, p, un, vn, static_cast<std::size_t>(r));
  require_finite_fields(un, vn);
  return {std::move(un), std::move(vn)};
}

namespace serial {

std::pair<Field2D, Field2D> turing_step(const Field2D& u, const Field2D& v, const TuringParams& p) {
  check_fields(u, v, p);
  Field2D un(u.nx, u.ny, u.dx), vn(v.nx, v.ny, v.dx);
  for (std::size_t r = 0; r < u.ny; ++r) update_row(u, v, p, un, vn, r);
  require_finite_fields(un, vn);
  return {std::move(un), std::move(vn)};
}

}  // namespace serial

NoiseSource::NoiseSource(std::uint64_t seed) : engine_(seed) {}

double NoiseSource::next(double amp) {
  // 53 high bits -> [0, 1) -> [-amp, amp)
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return amp * (2.0 * unit - 1.0);
}

std::pair<Field2D, Field2D> initial_state(const TuringParams& p, std::uint64_t seed, double noise_amp) {
  if (!(noise_amp >= 0.0)) throw std::invalid_argument("turing: noise amplitude must be non-negative");
  Field2D u(p.nx, p.ny, p.dx, kSteadyU), v(p.nx, p.ny, p.dx, kSteadyV);
  if (noise_amp > 0.0) {
    NoiseSource noise(seed);
    for (double& x : u.values) x += noise.next(noise_amp);
  }
  return {std::move(u), std::move(v)};
}

std::vector<Snapshot> turing_simulate(const TuringParams& p, std::uint64_t seed, double noise_amp, std::size_t n_steps,
                                      std::size_t record_every, int threads) {
  p.validate();
  if (record_every == 0) throw std::invalid_argument("turing_simulate: record_every must be >= 1");
  auto [u, v] = initial_state(p, seed, noise_amp);
  std::vector<Snapshot> out;
  out.push_back({0, u, v});
  for (std::size_t step = 1; step <= n_steps; ++step) {
    try {
      auto next = turing_step(u, v, p, threads);
      u = std::move(next.first);
      v = std::move(next.second);
    } catch (const StepFailure& e) {
      throw e.at_step(step);
    }
    if (step % record_every == 0) out.push_back({step, u, v});
  }
  return out;
}

PatternStats pattern_stats(const Field2D& f) {
  if (f.values.empty()) throw std::invalid_argument("pattern_stats: empty field");
  const double n = static_cast<double>(f.values.size());
  double sum = 0.0;
  double lo = f.values.front(), hi = f.values.front();
  for (double x : f.values) {
    sum += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : f.values) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n), lo, hi};
}

std::vector<double> laplacian_wavenumbers(std::size_t nx, std::size_t ny, double dx) {
  using std::numbers::pi;
  std::vector<double> out;
  out.reserve(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) {
    const double sx = std::sin(pi * static_cast<double>(i) / static_cast<double>(nx));
    for (std::size_t j = 0; j < ny; ++j) {
      const double sy = std::sin(pi * static_cast<double>(j) / static_cast<double>(ny));
      out.push_back(4.0 / (dx * dx) * (sx * sx + sy * sy));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + b); }),
            out.end());
  return out;
}

namespace {

// Mode matrix of the linearisation about (16, 1) for -lap -> k2.
struct Mat2 {
  double a, b, c, d;
};

Mat2 mode_matrix(double A, double B, double k2, Coupling cpl) {
  // d(du)/du = v - 1 = 0, d(du)/dv = u = 16, d(dv)/du = -v = -1, d(dv)/dv = -u = -16
  Mat2 m{-A * k2, kSteadyU, -kSteadyV, -kSteadyU};
  if (cpl == Coupling::Inhibitor) {
    m.d -= B * k2;
  } else {
    m.c -= B * k2;
  }
  return m;
}

std::pair<std::complex<double>, std::complex<double>> eigenvalues(const Mat2& m) {
  const double tr = m.a + m.d;
  const double det = m.a * m.d - m.b * m.c;
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
  return {0.5 * (tr + disc), 0.5 * (tr - disc)};
}

}  // namespace

double linear_growth_rate(double A, double B, double k2, Coupling c) {
  const auto [l1, l2] = eigenvalues(mode_matrix(A, B, k2, c));
  return std::max(l1.real(), l2.real());
}

double euler_amplification(double A, double B, double dt, double k2, Coupling c) {
  Mat2 m = mode_matrix(A, B, k2, c);
  m = {1.0 + dt * m.a, dt * m.b, dt * m.c, 1.0 + dt * m.d};
  const auto [l1, l2] = eigenvalues(m);
  return std::max(std::abs(l1), std::abs(l2));
}

StabilityScan scan_instability(const std::vector<double>& As, const std::vector<double>& Bs, std::size_t nx,
                               std::size_t ny, double dx, Coupling c) {
  StabilityScan best;
  best.max_growth = -std::numeric_limits<double>::infinity();
  const auto ks = laplacian_wavenumbers(nx, ny, dx);
  for (double A : As) {
    for (double B : Bs) {
      for (double k2 : ks) {
        const double g = linear_growth_rate(A, B, k2, c);
        if (g > best.max_growth) best = {g, A, B, k2};
      }
    }
  }
  return best;
}

}  // namespace lab::turing
