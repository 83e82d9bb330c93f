#pragma once

// Point counts on y^2 = x^3 - d x modulo primes and the cumulative products
// prod_{p <= X} N_p / p, whose log-log slope tracks the rank.

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lab::arith {

struct CurveD {
  std::int64_t d = 1;
  void validate() const;  // d >= 1
};

enum class Count {
  Affine,      // solutions (x, y) in F_p^2
  Projective,  // affine + the point at infinity
};

class BadPrime : public std::invalid_argument {
 public:
  BadPrime(std::int64_t p, std::int64_t d);
};

/// Sieve of Eratosthenes; empty for X < 2.
std::vector<std::int64_t> primes_upto(std::int64_t x);

/// Largest p for which the per-prime residue table is used; above it the
/// quadratic character falls back to Euler's criterion.
inline constexpr std::int64_t kTableLimit = 1'000'000;

/// Quadratic character of a modulo odd prime p by Euler's criterion.
int legendre(std::int64_t a, std::int64_t p);

/// N_p = sum_x (1 + chi_p(x^3 - d x)); rejects primes dividing 2d.
std::int64_t count_points_mod_p(const CurveD& curve, std::int64_t p, Count kind = Count::Affine);

/// Exhaustive count over all (x, y) in [0, p)^2. Test oracle; O(p^2).
std::int64_t count_points_brute(const CurveD& curve, std::int64_t p);

struct ProductSeries {
  std::vector<std::int64_t> primes;    // good primes <= X, ascending
  std::vector<std::int64_t> counts;    // N_p for each entry
  std::vector<double> log_products;    // running sum of ln(N_p / p)
  std::int64_t d = 1;
  std::int64_t x_max = 0;
  std::size_t bad_primes_skipped = 0;
  Count kind = Count::Affine;
};

/// Point counts for the good primes are computed in parallel; the running
/// product is a sequential pass in prime order.
ProductSeries product_series(const CurveD& curve, std::int64_t x_max, Count kind = Count::Affine, int threads = 0);

namespace serial {
ProductSeries product_series(const CurveD& curve, std::int64_t x_max, Count kind = Count::Affine);
}

struct SlopeFit {
  double slope = 0.0;      // rank estimate
  double intercept = 0.0;  // ln C estimate
  double residual = 0.0;   // root-mean-square residual
  std::int64_t p_min_used = 0;
  std::size_t points = 0;
};

/// Least-squares fit of log_products against ln ln p over primes >= p_min.
SlopeFit rank_slope(const ProductSeries& series, std::int64_t p_min = 100);

}  // namespace lab::arith
