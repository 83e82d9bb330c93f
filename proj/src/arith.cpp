#include "lab/arith.hpp"

#include <omp.h>

#include <cmath>
#include <cstddef>
#include <exception>
#include <string>

namespace lab::arith {

void CurveD::validate() const {
  if (d < 1) throw std::invalid_argument("curve: d must be >= 1");
}

BadPrime::BadPrime(std::int64_t p, std::int64_t d)
    : std::invalid_argument("bad prime " + std::to_string(p) + " divides 2d = " + std::to_string(2 * d)) {}

std::vector<std::int64_t> primes_upto(std::int64_t x) {
  std::vector<std::int64_t> out;
  if (x < 2) return out;
  std::vector<bool> composite(static_cast<std::size_t>(x) + 1, false);
  for (std::int64_t i = 2; i <= x; ++i) {
    if (composite[static_cast<std::size_t>(i)]) continue;
    out.push_back(i);
    for (std::int64_t j = i * i; j <= x; j += i) composite[static_cast<std::size_t>(j)] = true;
  }
  return out;
}

namespace {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  base %= m;
  while (e > 0) {
    if (e & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    e >>= 1;
  }
  return r;
}

inline std::uint64_t curve_rhs(std::uint64_t x, std::uint64_t dm, std::uint64_t p) {
  const std::uint64_t x2 = mulmod(x, x, p);
  return mulmod(x, (x2 + p - dm) % p, p);
}

// counts[a] = number of y in [0, p) with y^2 = a (mod p), i.e. 1 + chi_p(a).
const std::vector<std::uint8_t>& square_counts(std::uint64_t p) {
  thread_local std::vector<std::uint8_t> table;
  table.assign(p, 0);
  table[0] = 1;
  std::uint64_t sq = 0;
  for (std::uint64_t y = 1; y <= (p - 1) / 2; ++y) {
    sq += 2 * y - 1;  // y^2 from (y-1)^2
    if (sq >= p) sq %= p;
    table[sq] = 2;
  }
  return table;
}

std::int64_t count_good(std::int64_t d, std::int64_t p, Count kind) {
  const auto up = static_cast<std::uint64_t>(p);
  const auto dm = static_cast<std::uint64_t>(d % p);
  std::int64_t n = 0;
  if (p <= kTableLimit) {
    // Walk f(x) = x^3 - d x by finite differences: f(0) = 0, first difference
    // 1 - d, second difference 6x + 6, third difference 6; all kept in [0, p).
    const auto& table = square_counts(up);
    const std::uint64_t six = 6 % up;
    std::uint64_t f = 0;
    std::uint64_t d1 = (1 + up - dm) % up;
    std::uint64_t d2 = six;
    for (std::uint64_t x = 0; x < up; ++x) {
      n += table[f];
      f += d1;
      if (f >= up) f -= up;
      d1 += d2;
      if (d1 >= up) d1 -= up;
      d2 += six;
      if (d2 >= up) d2 -= up;
    }
  } else {
    for (std::uint64_t x = 0; x < up; ++x) n += 1 + legendre(static_cast<std::int64_t>(curve_rhs(x, dm, up)), p);
  }
  return kind == Count::Projective ? n + 1 : n;
}

bool is_bad(std::int64_t d, std::int64_t p) { return (2 * d) % p == 0; }

void check_prime(std::int64_t p) {
  if (p < 2) throw std::invalid_argument("count_points_mod_p: p must be prime");
  for (std::int64_t q = 2; q * q <= p; ++q) {
    if (p % q == 0) throw std::invalid_argument("count_points_mod_p: " + std::to_string(p) + " is not prime");
  }
}

ProductSeries series_header(const CurveD& curve, std::int64_t x_max, Count kind) {
  curve.validate();
  if (x_max < 3) throw std::invalid_argument("product_series: X must be >= 3");
  ProductSeries s;
  s.d = curve.d;
  s.x_max = x_max;
  s.kind = kind;
  for (std::int64_t p : primes_upto(x_max)) {
    if (is_bad(curve.d, p)) {
      ++s.bad_primes_skipped;
    } else {
      s.primes.push_back(p);
    }
  }
  s.counts.resize(s.primes.size());
  return s;
}

void accumulate(ProductSeries& s) {
  s.log_products.resize(s.primes.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.primes.size(); ++i) {
    if (s.counts[i] <= 0) {
      throw std::runtime_error("product_series: N_p = 0 at p = " + std::to_string(s.primes[i]));
    }
    acc += std::log(static_cast<double>(s.counts[i]) / static_cast<double>(s.primes[i]));
    s.log_products[i] = acc;
  }
}

}  // namespace

int legendre(std::int64_t a, std::int64_t p) {
  const auto up = static_cast<std::uint64_t>(p);
  const std::uint64_t am = static_cast<std::uint64_t>(((a % p) + p) % p);
  if (am == 0) return 0;
  return powmod(am, (up - 1) / 2, up) == 1 ? 1 : -1;
}

std::int64_t count_points_mod_p(const CurveD& curve, std::int64_t p, Count kind) {
  curve.validate();
  check_prime(p);
  if (is_bad(curve.d, p)) throw BadPrime(p, curve.d);
  return count_good(curve.d, p, kind);
}

std::int64_t count_points_brute(const CurveD& curve, std::int64_t p) {
  std::int64_t n = 0;
  const std::int64_t dm = curve.d % p;
  for (std::int64_t x = 0; x < p; ++x) {
    const std::int64_t rhs = ((x * x % p * x - dm * x) % p + p) % p;
    for (std::int64_t y = 0; y < p; ++y) {
      if (y * y % p == rhs) ++n;
    }
  }
  return n;
}

ProductSeries product_series(const CurveD& curve, std::int64_t x_max, Count kind, int threads) {
  ProductSeries s = series_header(curve, x_max, kind);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(s.primes.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    s.counts[k] = count_good(s.d, s.primes[k], kind);
  }
  accumulate(s);
  return s;
}

namespace serial {

ProductSeries product_series(const CurveD& curve, std::int64_t x_max, Count kind) {
  ProductSeries s = series_header(curve, x_max, kind);
  for (std::size_t i = 0; i < s.primes.size(); ++i) s.counts[i] = count_good(s.d, s.primes[i], kind);
  accumulate(s);
  return s;
}

}  // namespace serial

SlopeFit rank_slope(const ProductSeries& series, std::int64_t p_min) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  std::int64_t first = 0;
  for (std::size_t i = 0; i < series.primes.size(); ++i) {
    const std::int64_t p = series.primes[i];
    if (p < p_min) continue;
    if (n == 0) first = p;
    const double x = std::log(std::log(static_cast<double>(p)));
    const double y = series.log_products[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 10) throw std::invalid_argument("rank_slope: fewer than 10 primes above p_min");
  const double nd = static_cast<double>(n);
  const double denom = nd * sxx - sx * sx;
  SlopeFit fit;
  fit.slope = (nd * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / nd;
  fit.p_min_used = first;
  fit.points = n;
  double ss = 0.0;
  for (std::size_t i = 0; i < series.primes.size(); ++i) {
    const std::int64_t p = series.primes[i];
    if (p < p_min) continue;
    const double e = series.log_products[i] - (fit.intercept + fit.slope * std::log(std::log(static_cast<double>(p))));
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / nd);
  return fit;
}

}  // namespace lab::arith
