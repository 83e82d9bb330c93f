#pragma once

// Discrete-time maps: logistic (bifurcation diagram, superstable cascade) and Hénon.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lab::maps {

struct LogisticParams {
  double r = 3.5;
  void validate() const;  // 0 < r <= 4
};

inline double logistic(double r, double x) { return r * x * (1.0 - x); }

/// n iterates after discarding `transient`; requires x0 in [0, 1].
std::vector<double> logistic_orbit(const LogisticParams& p, double x0, std::size_t transient, std::size_t n);

struct BifurcationPoint {
  double r = 0.0;
  double x = 0.0;
};

struct BifurcationCloud {
  std::vector<BifurcationPoint> points;  // column-major: all samples for r_0, then r_1, ...
  double r_min = 0.0;
  double r_max = 0.0;
  std::size_t n_r = 0;
  std::size_t samples_per_r = 0;
  std::size_t transient = 0;
};

/// Columns at n_r evenly spaced r values (endpoints included), computed in parallel.
BifurcationCloud bifurcation_diagram(double r_min, double r_max, std::size_t n_r, std::size_t transient,
                                     std::size_t samples, double x0 = 0.5, int threads = 0);

namespace serial {
BifurcationCloud bifurcation_diagram(double r_min, double r_max, std::size_t n_r, std::size_t transient,
                                     std::size_t samples, double x0 = 0.5);
}

/// Accumulation point of the period-doubling cascade, rounded up; used only as
/// the right end of the root brackets.
inline constexpr double kCascadeGuard = 3.5699457;

/// Raised when double precision can no longer separate the next superstable
/// parameter from its neighbours.
class PrecisionExhausted : public std::runtime_error {
 public:
  PrecisionExhausted(std::size_t m, const std::string& why);
  std::size_t level() const noexcept { return m_; }

 private:
  std::size_t m_;
};

/// f_r^(2^(m-1))(1/2) - 1/2
double critical_return(double r, std::size_t m);

/// R_1..R_count: the parameters at which x = 1/2 lies on a cycle of period 2^(m-1).
std::vector<double> superstable_params(std::size_t count);

/// (R_m - R_{m-1}) / (R_{m+1} - R_m) for m = 2..count-1.
std::vector<double> feigenbaum_delta(std::size_t count);
std::vector<double> feigenbaum_ratios(const std::vector<double>& superstable);

struct HenonParams {
  double a = 1.4;
  double b = 0.3;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 henon(const HenonParams& p, Point2 s) { return {s.y + 1.0 - p.a * s.x * s.x, p.b * s.x}; }

/// Inverse map; requires b != 0.
Point2 henon_inverse(const HenonParams& p, Point2 s);

inline constexpr double kHenonEscape = 1e6;

class HenonEscape : public std::runtime_error {
 public:
  explicit HenonEscape(std::size_t iteration);
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// n iterates after `transient`; throws HenonEscape once |x| exceeds 1e6.
std::vector<Point2> henon_orbit(const HenonParams& p, Point2 start, std::size_t transient, std::size_t n);

/// Real roots of a x^2 + (1 - b) x - 1 = 0 with y = b x, sorted by x.
std::vector<Point2> henon_fixed_points(const HenonParams& p);

}  // namespace lab::maps
