#include "lab/fractal.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>
#include <type_traits>

namespace lab::fractal {

void Viewport::validate() const {
  if (!std::isfinite(center.real()) || !std::isfinite(center.imag())) {
    throw std::invalid_argument("viewport: center must be finite");
  }
  if (!(width > 0.0) || !std::isfinite(width)) throw std::invalid_argument("viewport: width must be positive");
  if (cols < 1 || rows < 1) throw std::invalid_argument("viewport: pixel dimensions must be >= 1");
}

Complex Viewport::pixel(std::size_t row, std::size_t col) const {
  const double h = pixel_size();
  const double dc = static_cast<double>(col) + 0.5 - 0.5 * static_cast<double>(cols);
  const double dr = static_cast<double>(row) + 0.5 - 0.5 * static_cast<double>(rows);
  return {center.real() + dc * h, center.imag() - dr * h};
}

EscapeResult escape_time(Complex c, Complex z0, int max_iter, double bailout) {
  const double b2 = bailout * bailout;
  double x = z0.real(), y = z0.imag();
  const double cx = c.real(), cy = c.imag();
  for (int n = 1; n < max_iter; ++n) {
    if (x * x + y * y > b2) return {n, {x, y}};
    const double xn = x * x - y * y + cx;
    y = 2.0 * x * y + cy;
    x = xn;
  }
  return {max_iter, {x, y}};
}

double smooth_count(const EscapeResult& r, int max_iter, double bailout) {
  if (r.count >= max_iter) return static_cast<double>(max_iter);
  return static_cast<double>(r.count) - std::log2(std::log(std::abs(r.final_z)) / std::log(bailout));
}

bool in_main_components(Complex c) {
  const double x = c.real(), y = c.imag();
  const double xq = x - 0.25;
  const double q = xq * xq + y * y;
  if (q * (q + xq) <= 0.25 * y * y) return true;
  return (x + 1.0) * (x + 1.0) + y * y <= 1.0 / 16.0;
}

Complex cube_root_of_unity(int k) {
  switch (((k % 3) + 3) % 3) {
    case 0: return {1.0, 0.0};
    case 1: return {-0.5, std::numbers::sqrt3 / 2.0};
    default: return {-0.5, -std::numbers::sqrt3 / 2.0};
  }
}

NewtonResult newton_point(Complex z0, int max_iter, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("newton: tol must be positive");
  NewtonResult r;
  Complex z = z0;
  static const Complex roots[3] = {cube_root_of_unity(0), cube_root_of_unity(1), cube_root_of_unity(2)};
  for (int it = 0; it < max_iter; ++it) {
    int best = -1;
    double best_d = tol;
    for (int k = 0; k < 3; ++k) {
      const double d = std::abs(z - roots[k]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    if (best >= 0) {
      r.label = best;
      r.iterations = it;
      r.z = z;
      return r;
    }
    if (z == Complex(0.0, 0.0)) {
      z = Complex(tol, 0.0);
      r.perturbed = true;
    }
    const Complex z2 = z * z;
    z -= (z2 * z - 1.0) / (3.0 * z2);
  }
  r.label = -1;
  r.iterations = max_iter;
  r.z = z;
  return r;
}

const Viewport& job_viewport(const RenderJob& job) {
  return std::visit([](const auto& j) -> const Viewport& { return j.viewport; }, job);
}

std::vector<TileRect> tile_rects(const Viewport& vp, std::size_t tile_size) {
  if (tile_size < 1) throw std::invalid_argument("tile_size must be >= 1");
  std::vector<TileRect> out;
  for (std::size_t r = 0; r < vp.rows; r += tile_size) {
    for (std::size_t c = 0; c < vp.cols; c += tile_size) {
      out.push_back({r, c, std::min(tile_size, vp.rows - r), std::min(tile_size, vp.cols - c)});
    }
  }
  return out;
}

namespace {

void validate_job(const RenderJob& job) {
  std::visit(
      [](const auto& j) {
        j.viewport.validate();
        if (j.max_iter < 1) throw std::invalid_argument("render: max_iter must be >= 1");
      },
      job);
  if (const auto* j = std::get_if<JuliaJob>(&job); j && j->bailout < 2.0) {
    throw std::invalid_argument("render: bailout must be >= 2");
  }
  if (const auto* j = std::get_if<MandelbrotJob>(&job); j && j->bailout < 2.0) {
    throw std::invalid_argument("render: bailout must be >= 2");
  }
  if (const auto* j = std::get_if<NewtonJob>(&job); j && !(j->tol > 0.0)) {
    throw std::invalid_argument("render: tol must be positive");
  }
}

EscapeGrid make_escape_grid(const Viewport& vp, int max_iter, double bailout, bool smooth) {
  EscapeGrid g;
  g.viewport = vp;
  g.max_iter = max_iter;
  g.bailout = bailout;
  g.counts.assign(vp.pixels(), 0);
  if (smooth) g.smooth.assign(vp.pixels(), 0.0);
  return g;
}

Complex checked_pixel(const Viewport& vp, std::size_t row, std::size_t col) {
  const Complex p = vp.pixel(row, col);
  if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
    throw std::domain_error("non-finite pixel coordinate at (" + std::to_string(row) + ", " + std::to_string(col) + ")");
  }
  return p;
}

void store_escape(EscapeGrid& g, std::size_t idx, const EscapeResult& r) {
  g.counts[idx] = r.count;
  if (!g.smooth.empty()) g.smooth[idx] = smooth_count(r, g.max_iter, g.bailout);
}

void render_pixel(const JuliaJob& j, EscapeGrid& g, std::size_t row, std::size_t col) {
  store_escape(g, row * j.viewport.cols + col, escape_time(j.c, checked_pixel(j.viewport, row, col), j.max_iter, j.bailout));
}

void render_pixel(const MandelbrotJob& j, EscapeGrid& g, std::size_t row, std::size_t col) {
  const Complex c = checked_pixel(j.viewport, row, col);
  const std::size_t idx = row * j.viewport.cols + col;
  if (j.interior_check && in_main_components(c)) {
    g.counts[idx] = j.max_iter;
    if (!g.smooth.empty()) g.smooth[idx] = static_cast<double>(j.max_iter);
    return;
  }
  store_escape(g, idx, escape_time(c, {0.0, 0.0}, j.max_iter, j.bailout));
}

void render_pixel(const NewtonJob& j, BasinGrid& g, std::size_t row, std::size_t col, bool& perturbed) {
  const std::size_t idx = row * j.viewport.cols + col;
  const auto r = newton_point(checked_pixel(j.viewport, row, col), j.max_iter, j.tol);
  g.labels[idx] = r.label;
  g.iterations[idx] = r.iterations;
  perturbed = perturbed || r.perturbed;
}

// Returns true if any pixel of the tile needed the singular-start perturbation.
bool render_rect(const RenderJob& job, const TileRect& t, RenderGrid& grid) {
  bool perturbed = false;
  std::visit(
      [&](const auto& j) {
        using J = std::decay_t<decltype(j)>;
        for (std::size_t r = t.row0; r < t.row0 + t.rows; ++r) {
          for (std::size_t c = t.col0; c < t.col0 + t.cols; ++c) {
            if constexpr (std::is_same_v<J, NewtonJob>) {
              render_pixel(j, std::get<BasinGrid>(grid), r, c, perturbed);
            } else {
              render_pixel(j, std::get<EscapeGrid>(grid), r, c);
            }
          }
        }
      },
      job);
  return perturbed;
}

}  // namespace

RenderGrid allocate_grid(const RenderJob& job) {
  validate_job(job);
  return std::visit(
      [](const auto& j) -> RenderGrid {
        using J = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<J, NewtonJob>) {
          BasinGrid g;
          g.viewport = j.viewport;
          g.max_iter = j.max_iter;
          g.tol = j.tol;
          g.labels.assign(j.viewport.pixels(), -1);
          g.iterations.assign(j.viewport.pixels(), 0);
          return g;
        } else {
          return make_escape_grid(j.viewport, j.max_iter, j.bailout, j.smooth);
        }
      },
      job);
}

TileFailure::TileFailure(const TileRect& tile, const std::string& why)
    : std::runtime_error("tile at row " + std::to_string(tile.row0) + ", col " + std::to_string(tile.col0) +
                         " failed: " + why),
      tile_(tile) {}

void render_tile(const RenderJob& job, const TileRect& tile, RenderGrid& grid) {
  try {
    if (render_rect(job, tile, grid)) {
      if (auto* b = std::get_if<BasinGrid>(&grid)) b->origin_perturbed = true;
    }
  } catch (const std::exception& e) {
    throw TileFailure(tile, e.what());
  }
}

RenderResult render_tiles(const RenderJob& job, std::size_t tile_size, int workers) {
  const auto start = std::chrono::steady_clock::now();
  RenderResult out{allocate_grid(job), {}};
  const auto tiles = tile_rects(job_viewport(job), tile_size);
  const int nt = workers > 0 ? workers : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(tiles.size());

  std::vector<char> perturbed(tiles.size(), 0);
  std::exception_ptr failure;
  std::size_t failed_tile = tiles.size();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& t = tiles[static_cast<std::size_t>(i)];
    try {
      perturbed[static_cast<std::size_t>(i)] = render_rect(job, t, out.grid) ? 1 : 0;
    } catch (const std::exception& e) {
#pragma omp critical(lab_tile_failure)
      {
        // Report the first failing tile in tile order, independent of scheduling.
        if (static_cast<std::size_t>(i) < failed_tile) {
          failed_tile = static_cast<std::size_t>(i);
          failure = std::make_exception_ptr(TileFailure(t, e.what()));
        }
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  if (auto* b = std::get_if<BasinGrid>(&out.grid)) {
    for (char p : perturbed) b->origin_perturbed = b->origin_perturbed || p != 0;
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.stats.pixels = job_viewport(job).pixels();
  out.stats.tiles = tiles.size();
  out.stats.seconds = secs;
  out.stats.pixels_per_second = secs > 0.0 ? static_cast<double>(out.stats.pixels) / secs : 0.0;
  return out;
}

namespace serial {

RenderGrid render(const RenderJob& job) {
  RenderGrid grid = allocate_grid(job);
  const Viewport& vp = job_viewport(job);
  const TileRect whole{0, 0, vp.rows, vp.cols};
  render_tile(job, whole, grid);
  return grid;
}

}  // namespace serial

EscapeGrid julia_grid(Complex c, const Viewport& vp, int max_iter) {
  return std::get<EscapeGrid>(render_tiles(JuliaJob{c, vp, max_iter}).grid);
}

EscapeGrid mandelbrot_grid(const Viewport& vp, int max_iter) {
  return std::get<EscapeGrid>(render_tiles(MandelbrotJob{vp, max_iter}).grid);
}

BasinGrid newton_basins(const Viewport& vp, int max_iter, double tol) {
  return std::get<BasinGrid>(render_tiles(NewtonJob{vp, max_iter, tol}).grid);
}

}  // namespace lab::fractal
