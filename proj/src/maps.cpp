#include "lab/maps.hpp"

#include <omp.h>

#include <cmath>
#include <limits>

namespace lab::maps {

void LogisticParams::validate() const {
  if (!(r > 0.0 && r <= 4.0)) throw std::invalid_argument("logistic: r must satisfy 0 < r <= 4");
}

std::vector<double> logistic_orbit(const LogisticParams& p, double x0, std::size_t transient, std::size_t n) {
  p.validate();
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw std::invalid_argument("logistic: x0 must lie in [0, 1]");
  double x = x0;
  for (std::size_t i = 0; i < transient; ++i) x = logistic(p.r, x);
  std::vector<double> out(n);
  for (auto& v : out) {
    x = logistic(p.r, x);
    v = x;
  }
  return out;
}

namespace {

void validate_window(double r_min, double r_max, std::size_t n_r, double x0) {
  if (!(r_min > 0.0 && r_min < r_max && r_max <= 4.0)) {
    throw std::invalid_argument("bifurcation_diagram: need 0 < r_min < r_max <= 4");
  }
  if (n_r < 2) throw std::invalid_argument("bifurcation_diagram: n_r must be >= 2");
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw std::invalid_argument("bifurcation_diagram: x0 must lie in [0, 1]");
}

BifurcationCloud empty_cloud(double r_min, double r_max, std::size_t n_r, std::size_t transient, std::size_t samples) {
  BifurcationCloud c;
  c.r_min = r_min;
  c.r_max = r_max;
  c.n_r = n_r;
  c.samples_per_r = samples;
  c.transient = transient;
  c.points.resize(n_r * samples);
  return c;
}

inline double column_r(double r_min, double r_max, std::size_t n_r, std::size_t j) {
  if (j + 1 == n_r) return r_max;
  return r_min + static_cast<double>(j) * (r_max - r_min) / static_cast<double>(n_r - 1);
}

void fill_column(BifurcationCloud& c, std::size_t j, double x0) {
  const double r = column_r(c.r_min, c.r_max, c.n_r, j);
  double x = x0;
  for (std::size_t i = 0; i < c.transient; ++i) x = logistic(r, x);
  BifurcationPoint* col = c.points.data() + j * c.samples_per_r;
  for (std::size_t i = 0; i < c.samples_per_r; ++i) {
    x = logistic(r, x);
    col[i] = {r, x};
  }
}

}  // namespace

BifurcationCloud bifurcation_diagram(double r_min, double r_max, std::size_t n_r, std::size_t transient,
                                     std::size_t samples, double x0, int threads) {
  validate_window(r_min, r_max, n_r, x0);
  auto cloud = empty_cloud(r_min, r_max, n_r, transient, samples);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(n_r);
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t j = 0; j < n; ++j) fill_column(cloud, static_cast<std::size_t>(j), x0);
  return cloud;
}

namespace serial {

BifurcationCloud bifurcation_diagram(double r_min, double r_max, std::size_t n_r, std::size_t transient,
                                     std::size_t samples, double x0) {
  validate_window(r_min, r_max, n_r, x0);
  auto cloud = empty_cloud(r_min, r_max, n_r, transient, samples);
  for (std::size_t j = 0; j < n_r; ++j) fill_column(cloud, j, x0);
  return cloud;
}

}  // namespace serial

PrecisionExhausted::PrecisionExhausted(std::size_t m, const std::string& why)
    : std::runtime_error("superstable parameter R_" + std::to_string(m) + ": " + why), m_(m) {}

double critical_return(double r, std::size_t m) {
  const std::size_t period = std::size_t{1} << (m - 1);
  double x = 0.5;
  for (std::size_t i = 0; i < period; ++i) x = logistic(r, x);
  return x - 0.5;
}

namespace {

// Bisection on a sign-changing bracket until no double lies strictly between
// the endpoints.
double bisect(std::size_t m, double lo, double hi, double glo) {
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = critical_return(mid, m);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return std::abs(glo) <= std::abs(critical_return(hi, m)) ? lo : hi;
}

constexpr double kResidualTolerance = 1e-10;

}  // namespace

std::vector<double> superstable_params(std::size_t count) {
  if (count < 1) throw std::invalid_argument("superstable_params: count must be >= 1");
  std::vector<double> roots;
  roots.reserve(count);
  // R_1 is the only root of r/4 - 1/2 on (1, 3).
  roots.push_back(bisect(1, 1.0, 3.0, critical_return(1.0, 1)));

  double gap = 1.2;  // scale of the first interval, refined as roots arrive
  for (std::size_t m = 2; m <= count; ++m) {
    const double prev = roots.back();
    const double step = gap * 0.005;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * prev) {
      throw PrecisionExhausted(m, "scan step below double resolution");
    }
    // Start just past R_{m-1}, which is itself a root of this level's equation.
    double lo = prev + gap * 0.02;
    double glo = critical_return(lo, m);
    double hi = lo;
    for (;;) {
      hi = lo + step;
      if (hi > kCascadeGuard) throw PrecisionExhausted(m, "no sign change below the accumulation guard");
      const double ghi = critical_return(hi, m);
      if ((ghi < 0.0) != (glo < 0.0) || ghi == 0.0) break;
      lo = hi;
      glo = ghi;
    }
    const double root = bisect(m, lo, hi, glo);
    if (!(root > prev) || root >= kCascadeGuard) throw PrecisionExhausted(m, "root not increasing");
    if (std::abs(critical_return(root, m)) >= kResidualTolerance) {
      throw PrecisionExhausted(m, "residual above tolerance");
    }
    gap = root - prev;
    roots.push_back(root);
  }
  return roots;
}

std::vector<double> feigenbaum_ratios(const std::vector<double>& rs) {
  std::vector<double> out;
  for (std::size_t m = 1; m + 1 < rs.size(); ++m) out.push_back((rs[m] - rs[m - 1]) / (rs[m + 1] - rs[m]));
  return out;
}

std::vector<double> feigenbaum_delta(std::size_t count) {
  if (count < 4) throw std::invalid_argument("feigenbaum_delta: count must be >= 4");
  return feigenbaum_ratios(superstable_params(count));
}

Point2 henon_inverse(const HenonParams& p, Point2 s) {
  if (p.b == 0.0) throw std::invalid_argument("henon_inverse: b must be non-zero");
  const double x = s.y / p.b;
  return {x, s.x - 1.0 + p.a * x * x};
}

HenonEscape::HenonEscape(std::size_t iteration)
    : std::runtime_error("henon orbit escaped (|x| > 1e6) at iteration " + std::to_string(iteration)),
      iteration_(iteration) {}

std::vector<Point2> henon_orbit(const HenonParams& p, Point2 start, std::size_t transient, std::size_t n) {
  if (!std::isfinite(start.x) || !std::isfinite(start.y)) throw std::invalid_argument("henon: start must be finite");
  Point2 s = start;
  std::vector<Point2> out;
  out.reserve(n);
  for (std::size_t i = 1; i <= transient + n; ++i) {
    s = henon(p, s);
    if (!(std::abs(s.x) <= kHenonEscape)) throw HenonEscape(i);
    if (i > transient) out.push_back(s);
  }
  return out;
}

std::vector<Point2> henon_fixed_points(const HenonParams& p) {
  if (p.a == 0.0) throw std::invalid_argument("henon_fixed_points: a must be non-zero");
  const double bq = 1.0 - p.b;
  const double disc = bq * bq + 4.0 * p.a;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  // Stable form of the quadratic formula.
  const double q = -0.5 * (bq + std::copysign(sq, bq));
  std::vector<double> xs;
  if (q != 0.0) {
    xs = {q / p.a, -1.0 / q};
  } else {
    xs = {sq / (2.0 * p.a), -sq / (2.0 * p.a)};
  }
  if (xs[0] > xs[1]) std::swap(xs[0], xs[1]);
  if (disc == 0.0) xs.pop_back();
  std::vector<Point2> out;
  for (double x : xs) out.push_back({x, p.b * x});
  return out;
}

}  // namespace lab::maps
