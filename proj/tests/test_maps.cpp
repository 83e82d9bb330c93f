#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "lab/maps.hpp"

using namespace lab::maps;

namespace {

// 60-digit bisection oracle (tests/oracles/superstable_oracle.py).
constexpr double kOracleR[] = {
    2.0,
    3.2360679774997896964,
    3.49856169932770152,
    3.5546408627688248654,
    3.566667379856268514,
    3.5692435316371103378,
    3.5697952937499446205,
    3.5699134654223485148,
    3.5699387742333054878,
    3.5699441946080649332,
};
constexpr double kOracleDelta2 = 4.7089430135405;
constexpr double kOracleDelta8 = 4.6691910024851;
constexpr double kOracleDelta9 = 4.66919947054773;

std::size_t distinct_within(std::vector<double> xs, double tol) {
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.empty() ? 0 : 1;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] - xs[i - 1] > tol) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("logistic_orbit examples") {
  const auto fixed = logistic_orbit({2.0}, 0.1, 1000, 1);
  REQUIRE(fixed.size() == 1);
  CHECK(std::abs(fixed[0] - 0.5) < 1e-12);

  for (double x : logistic_orbit({4.0}, 0.0, 0, 50)) CHECK(x == 0.0);

  const auto cycle = logistic_orbit({3.2}, 0.3, 1000, 4);
  REQUIRE(cycle.size() == 4);
  const double lo = std::min(cycle[0], cycle[1]);
  const double hi = std::max(cycle[0], cycle[1]);
  CHECK(lo == doctest::Approx(0.5130).epsilon(1e-4));
  CHECK(hi == doctest::Approx(0.7995).epsilon(1e-4));
  CHECK(cycle[2] == doctest::Approx(cycle[0]).epsilon(1e-12));
  CHECK(cycle[3] == doctest::Approx(cycle[1]).epsilon(1e-12));

  CHECK_THROWS_AS(logistic_orbit({3.0}, 1.5, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(logistic_orbit({4.5}, 0.5, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(logistic_orbit({0.0}, 0.5, 0, 1), std::invalid_argument);
}

TEST_CASE("property: the logistic map keeps [0, 1] invariant") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ur(0.0, 4.0);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const double r = std::max(ur(rng), 1e-9);
    const double y = logistic(r, ux(rng));
    CHECK_MESSAGE((y >= 0.0 && y <= 1.0), "r=" << r);
  }
  CHECK(logistic(4.0, 0.5) == 1.0);
}

TEST_CASE("bifurcation_diagram regimes") {
  SUBCASE("fixed-point window") {
    const auto cloud = bifurcation_diagram(2.4, 2.6, 21, 2000, 50);
    for (const auto& pt : cloud.points) CHECK(std::abs(pt.x - (1.0 - 1.0 / pt.r)) < 1e-6);
  }
  SUBCASE("period-two window") {
    const std::size_t samples = 40;
    const auto cloud = bifurcation_diagram(3.1, 3.3, 11, 20000, samples);
    for (std::size_t c = 0; c < cloud.n_r; ++c) {
      std::vector<double> xs;
      for (std::size_t s = 0; s < samples; ++s) xs.push_back(cloud.points[c * samples + s].x);
      CHECK(distinct_within(xs, 1e-6) == 2);
    }
  }
  SUBCASE("counting and bounds") {
    const auto cloud = bifurcation_diagram(2.4, 4.0, 2, 100, 17);
    CHECK(cloud.points.size() == 34);
    CHECK(cloud.points.front().r == 2.4);
    CHECK(cloud.points.back().r == 4.0);
    for (const auto& pt : bifurcation_diagram(2.4, 4.0, 50, 100, 50).points) {
      CHECK(pt.x >= 0.0);
      CHECK(pt.x <= 1.0);
      CHECK(pt.r >= 2.4);
      CHECK(pt.r <= 4.0);
    }
  }
  CHECK_THROWS_AS(bifurcation_diagram(3.0, 2.0, 10, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(bifurcation_diagram(2.0, 3.0, 1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(bifurcation_diagram(2.0, 4.5, 10, 1, 1), std::invalid_argument);
}

TEST_CASE("bifurcation_diagram is deterministic and matches the serial reference") {
  const auto a = bifurcation_diagram(2.8, 4.0, 300, 500, 64, 0.5, 4);
  const auto b = bifurcation_diagram(2.8, 4.0, 300, 500, 64, 0.5, 1);
  const auto c = serial::bifurcation_diagram(2.8, 4.0, 300, 500, 64);
  REQUIRE(a.points.size() == c.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].x == c.points[i].x);
    CHECK(b.points[i].x == c.points[i].x);
    CHECK(a.points[i].r == c.points[i].r);
  }
}

TEST_CASE("superstable parameters against the high-precision oracle") {
  const auto rs = superstable_params(10);
  REQUIRE(rs.size() == 10);
  CHECK(rs[0] == 2.0);
  CHECK(std::abs(rs[1] - (1.0 + std::sqrt(5.0))) < 1e-12);
  for (std::size_t m = 0; m < rs.size(); ++m) {
    CHECK_MESSAGE(std::abs(rs[m] - kOracleR[m]) < 1e-12, "R_" << m + 1);
    CHECK(std::abs(critical_return(rs[m], m + 1)) < 1e-10);
    if (m > 0) CHECK(rs[m] > rs[m - 1]);
    CHECK(rs[m] < kCascadeGuard);
  }
}

TEST_CASE("feigenbaum ratios") {
  CHECK(feigenbaum_delta(4).size() == 2);
  CHECK(feigenbaum_delta(4)[0] == doctest::Approx(kOracleDelta2).epsilon(1e-10));
  const auto d = feigenbaum_delta(10);
  REQUIRE(d.size() == 8);
  CHECK(std::abs(d[6] - kOracleDelta8) < 1e-6);
  CHECK(std::abs(d[7] - kOracleDelta9) < 1e-6);
  CHECK(std::abs(d[7] - d[6]) < 1e-3);
  CHECK(d[7] >= 4.6);
  CHECK(d[7] <= 4.75);
  // Successive estimates tighten from delta_3 on.
  for (std::size_t i = 2; i + 1 < d.size(); ++i) CHECK(std::abs(d[i + 1] - d[i]) < std::abs(d[i] - d[i - 1]));
  CHECK_THROWS_AS(feigenbaum_delta(3), std::invalid_argument);
}

TEST_CASE("superstable search reports precision exhaustion instead of garbage") {
  try {
    const auto rs = superstable_params(30);
    FAIL("expected PrecisionExhausted, got " << rs.size() << " roots");
  } catch (const PrecisionExhausted& e) {
    CHECK(e.level() > 10);
    CHECK(e.level() <= 30);
  }
}

TEST_CASE("henon_orbit examples") {
  // With a = b = 0 the map is (x, y) -> (y + 1, 0): one step zeroes y, the next pins x to 1.
  const auto flat = henon_orbit({0.0, 0.0}, {0.3, -0.7}, 0, 20);
  CHECK(flat[0].x == doctest::Approx(0.3));
  CHECK(flat[0].y == 0.0);
  for (std::size_t i = 1; i < flat.size(); ++i) {
    CHECK(flat[i].x == 1.0);
    CHECK(flat[i].y == 0.0);
  }
  for (const auto& pt : henon_orbit({0.0, 0.0}, {-4.0, 0.0}, 0, 5)) {
    CHECK(pt.x == 1.0);
    CHECK(pt.y == 0.0);
  }
  const auto orbit = henon_orbit({}, {0.0, 0.0}, 100, 10000);
  REQUIRE(orbit.size() == 10000);
  for (const auto& pt : orbit) {
    CHECK(std::abs(pt.x) <= 1.5);
    CHECK(std::abs(pt.y) <= 0.45);
  }
  try {
    henon_orbit({}, {10.0, 10.0}, 0, 100);
    FAIL("expected HenonEscape");
  } catch (const HenonEscape& e) {
    CHECK(e.iteration() < 10);
  }
}

TEST_CASE("henon fixed points") {
  const auto fps = henon_fixed_points({});
  REQUIRE(fps.size() == 2);
  CHECK(fps[0].x == doctest::Approx(-1.1313545).epsilon(1e-7));
  CHECK(fps[0].y == doctest::Approx(-0.3394064).epsilon(1e-7));
  CHECK(fps[1].x == doctest::Approx(0.6313545).epsilon(1e-7));
  CHECK(fps[1].y == doctest::Approx(0.1894064).epsilon(1e-7));
  for (const auto& fp : fps) {
    const Point2 q = henon({}, fp);
    CHECK(std::abs(q.x - fp.x) < 1e-12);
    CHECK(std::abs(q.y - fp.y) < 1e-12);
  }
  const auto unit = henon_fixed_points({1.0, 1.0});
  REQUIRE(unit.size() == 2);
  CHECK(unit[0].x == -1.0);
  CHECK(unit[0].y == -1.0);
  CHECK(unit[1].x == 1.0);
  CHECK(unit[1].y == 1.0);
  // a x^2 + 0.7 x - 1 has no real root for sufficiently negative a.
  CHECK(henon_fixed_points({-1.0, 0.3}).empty());
  CHECK_THROWS_AS(henon_fixed_points({0.0, 0.3}), std::invalid_argument);
}

TEST_CASE("property: henon inverse undoes the forward map") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const HenonParams p;
  for (int i = 0; i < 10000; ++i) {
    const Point2 s{u(rng), u(rng) * 0.3};
    const Point2 back = henon_inverse(p, henon(p, s));
    CHECK(std::abs(back.x - s.x) < 1e-10);
    CHECK(std::abs(back.y - s.y) < 1e-10);
  }
  CHECK_THROWS_AS(henon_inverse({1.4, 0.0}, {0.0, 0.0}), std::invalid_argument);
}
