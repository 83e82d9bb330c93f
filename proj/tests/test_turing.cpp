#include <cmath>
#include <stdexcept>
#include <tuple>

#include "doctest.h"
#include "lab/turing.hpp"

using namespace lab::turing;

namespace {

TuringParams small_grid() {
  TuringParams p;
  p.nx = 16;
  p.ny = 12;
  return p;
}

Field2D shift_right(const Field2D& f) {
  Field2D out(f.nx, f.ny, f.dx);
  for (std::size_t r = 0; r < f.ny; ++r) {
    for (std::size_t c = 0; c < f.nx; ++c) out.at(r, (c + 1) % f.nx) = f.at(r, c);
  }
  return out;
}

Field2D shift_down(const Field2D& f) {
  Field2D out(f.nx, f.ny, f.dx);
  for (std::size_t r = 0; r < f.ny; ++r) {
    for (std::size_t c = 0; c < f.nx; ++c) out.at((r + 1) % f.ny, c) = f.at(r, c);
  }
  return out;
}

// Linear-stability sweep frozen from tests/oracles/turing_stability_sweep.py.
const std::vector<double> kSweepA{0.0, 1e-3, 0.01, 0.05, 0.1, 0.5, 1, 2, 5};
const std::vector<double> kSweepB{0.0, 0.01, 0.1, 1, 2, 5, 10, 20, 50, 100};
constexpr double kOracleMaxGrowthInhibitor = -0.01960831432120358;
constexpr double kOracleMaxGrowthVerbatim = -1.0717967697244912;

}  // namespace

TEST_CASE("homogeneous steady state is an exact fixed point") {
  for (auto coupling : {Coupling::Inhibitor, Coupling::Verbatim}) {
    for (double A : {0.0, 0.1, 1.0}) {
      for (double B : {0.0, 4.0, 20.0}) {
        TuringParams p = small_grid();
        p.A = A;
        p.B = B;
        p.dt = 0.01;
        p.coupling = coupling;
        Field2D u(p.nx, p.ny, p.dx, kSteadyU), v(p.nx, p.ny, p.dx, kSteadyV);
        for (int i = 0; i < 10; ++i) std::tie(u, v) = turing_step(u, v, p);
        for (double x : u.values) CHECK(x == kSteadyU);
        for (double x : v.values) CHECK(x == kSteadyV);
      }
    }
  }
}

TEST_CASE("zero state feeds only the source term") {
  const TuringParams p = small_grid();
  const Field2D zero(p.nx, p.ny, p.dx, 0.0);
  const auto [u, v] = turing_step(zero, zero, p);
  for (double x : u.values) CHECK(x == 0.0);
  for (double x : v.values) CHECK(x == 16.0 * p.dt);
}

TEST_CASE("without diffusion each cell evolves alone") {
  TuringParams p = small_grid();
  p.A = 0.0;
  p.B = 0.0;
  Field2D u(p.nx, p.ny, p.dx, kSteadyU), v(p.nx, p.ny, p.dx, kSteadyV);
  u.at(5, 7) = 16.1;
  Field2D ref_u = u, ref_v = v;
  ref_u.at(5, 7) = kSteadyU;
  for (int i = 0; i < 200; ++i) {
    std::tie(u, v) = turing_step(u, v, p);
    std::tie(ref_u, ref_v) = turing_step(ref_u, ref_v, p);
  }
  for (std::size_t r = 0; r < p.ny; ++r) {
    for (std::size_t c = 0; c < p.nx; ++c) {
      if (r == 5 && c == 7) continue;
      CHECK(u.at(r, c) == ref_u.at(r, c));
      CHECK(v.at(r, c) == ref_v.at(r, c));
    }
  }
  CHECK(u.at(5, 7) != kSteadyU);
}

TEST_CASE("stepping commutes with periodic shifts") {
  TuringParams p = small_grid();
  p.A = 0.5;
  p.B = 4.0;
  p.dt = 0.01;
  auto [u, v] = initial_state(p, 99, 0.5);
  NoiseSource extra(4);
  for (double& x : v.values) x += extra.next(0.2);
  const auto [su, sv] = turing_step(u, v, p);
  for (auto shift : {shift_right, shift_down}) {
    const auto [tu, tv] = turing_step(shift(u), shift(v), p);
    CHECK(tu.values == shift(su).values);
    CHECK(tv.values == shift(sv).values);
  }
}

TEST_CASE("parallel step is bit-identical to the serial reference") {
  TuringParams p;
  p.A = 0.1;
  p.B = 4.0;
  p.coupling = Coupling::Verbatim;
  auto [u, v] = initial_state(p, 7, 0.3);
  for (int i = 0; i < 5; ++i) {
    const auto par = turing_step(u, v, p, 4);
    const auto ser = serial::turing_step(u, v, p);
    CHECK(par.first.values == ser.first.values);
    CHECK(par.second.values == ser.second.values);
    u = par.first;
    v = par.second;
  }
}

TEST_CASE("turing_simulate snapshots") {
  TuringParams p = small_grid();
  SUBCASE("no noise stays homogeneous") {
    const auto snaps = turing_simulate(p, 1, 0.0, 100, 25);
    REQUIRE(snaps.size() == 5);
    for (const auto& s : snaps) {
      for (double x : s.u.values) CHECK(x == kSteadyU);
      for (double x : s.v.values) CHECK(x == kSteadyV);
    }
  }
  SUBCASE("record_every equal to the run length gives two snapshots") {
    const auto snaps = turing_simulate(p, 1, 0.01, 40, 40);
    REQUIRE(snaps.size() == 2);
    CHECK(snaps[0].step == 0);
    CHECK(snaps[1].step == 40);
  }
  SUBCASE("seeded runs are reproducible") {
    const auto a = turing_simulate(p, 42, 0.01, 50, 50);
    const auto b = turing_simulate(p, 42, 0.01, 50, 50);
    const auto c = turing_simulate(p, 43, 0.01, 50, 50);
    CHECK(a.back().u.values == b.back().u.values);
    CHECK(a.back().u.values != c.back().u.values);
  }
  CHECK_THROWS_AS(turing_simulate(p, 1, 0.01, 10, 0), std::invalid_argument);
}

TEST_CASE("initial noise is uniform, bounded and on u only") {
  const TuringParams p;
  const auto [u, v] = initial_state(p, 11, 0.01);
  for (double x : v.values) CHECK(x == kSteadyV);
  const auto st = pattern_stats(u);
  CHECK(st.min >= kSteadyU - 0.01);
  CHECK(st.max < kSteadyU + 0.01);
  CHECK(st.mean == doctest::Approx(kSteadyU).epsilon(1e-4));
  // Uniform on [-a, a) has standard deviation a / sqrt(3).
  CHECK(st.std == doctest::Approx(0.01 / std::sqrt(3.0)).epsilon(0.05));
}

TEST_CASE("parameter validation") {
  TuringParams p;
  CHECK_NOTHROW(p.validate());
  p.nx = 4;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.A = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.B = 100.0;  // dt = 0.02 > dx^2 / 400
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.A = 0.0;
  p.B = 0.0;
  p.dt = 0.2;  // no diffusive limit, but the reaction stiffness amplifies
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK(parse_coupling("inhibitor") == Coupling::Inhibitor);
  CHECK(parse_coupling("verbatim") == Coupling::Verbatim);
  CHECK_FALSE(parse_coupling("gray-scott").has_value());
}

TEST_CASE("pattern_stats") {
  const auto c = pattern_stats(Field2D(8, 8, 1.0, 2.5));
  CHECK(c.mean == 2.5);
  CHECK(c.std == 0.0);
  CHECK(c.min == 2.5);
  CHECK(c.max == 2.5);

  Field2D board(8, 8, 1.0);
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t col = 0; col < 8; ++col) board.at(r, col) = (r + col) % 2 ? 2.0 : 0.0;
  }
  const auto b = pattern_stats(board);
  CHECK(b.mean == 1.0);
  CHECK(b.std == 1.0);

  const auto one = pattern_stats(Field2D(1, 1, 1.0, 5.0));
  CHECK(one.mean == 5.0);
  CHECK(one.std == 0.0);
  CHECK(one.min == 5.0);
  CHECK(one.max == 5.0);
  CHECK_THROWS_AS(pattern_stats(Field2D{}), std::invalid_argument);
}

TEST_CASE("linear stability about the steady state matches the brute-force sweep") {
  const auto inhib = scan_instability(kSweepA, kSweepB, 64, 64, 1.0, Coupling::Inhibitor);
  const auto verb = scan_instability(kSweepA, kSweepB, 64, 64, 1.0, Coupling::Verbatim);
  CHECK(inhib.max_growth == doctest::Approx(kOracleMaxGrowthInhibitor).epsilon(1e-9));
  CHECK(verb.max_growth == doctest::Approx(kOracleMaxGrowthVerbatim).epsilon(1e-9));
  CHECK(inhib.max_growth < 0.0);
  CHECK(verb.max_growth < 0.0);
  // Homogeneous mode: eigenvalues of [[0, 16], [-1, -16]] are -8 +- sqrt(48).
  CHECK(linear_growth_rate(0.3, 7.0, 0.0, Coupling::Inhibitor) == doctest::Approx(-8.0 + std::sqrt(48.0)));
  const auto ks = laplacian_wavenumbers(8, 8, 1.0);
  CHECK(ks.front() == 0.0);
  CHECK(ks.back() == doctest::Approx(8.0));
}
