#pragma once

// Escape-time Julia/Mandelbrot grids and Newton basins for z^3 - 1.
//
// Rendering is split into square tiles; tiles are independent and write
// disjoint pixel ranges, so the tiled OpenMP path is bit-identical to the
// serial reference regardless of worker count, tile size or schedule.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <variant>
#include <vector>

namespace lab::fractal {

using Complex = std::complex<double>;

struct Viewport {
  Complex center{0.0, 0.0};
  double width = 3.0;
  std::size_t cols = 1;
  std::size_t rows = 1;

  void validate() const;
  double pixel_size() const { return width / static_cast<double>(cols); }
  double height() const { return pixel_size() * static_cast<double>(rows); }
  std::size_t pixels() const { return cols * rows; }

  /// Centre of pixel (row, col); row 0 is the top edge (largest imaginary part).
  /// Offsets are exact half-integers, so mirrored pixels of a viewport centred
  /// on an axis map to exactly negated coordinates.
  Complex pixel(std::size_t row, std::size_t col) const;
};

struct EscapeResult {
  int count = 0;
  Complex final_z{0.0, 0.0};
};

/// Iterates z <- z^2 + c from z0. The count is the 1-based position, within
/// the orbit z0, z1, ..., of the first term with |z| > bailout. max_iter is the
/// non-escaped sentinel: it is returned when none of z0..z_{max_iter-2}
/// escapes, and final_z is then z_{max_iter-1}.
EscapeResult escape_time(Complex c, Complex z0, int max_iter, double bailout = 2.0);

/// Fractional count (count - log2(ln|z| / ln bailout)) for escaped orbits,
/// max_iter otherwise.
double smooth_count(const EscapeResult& r, int max_iter, double bailout);

inline constexpr double kSmoothBailout = 256.0;

/// Main-cardioid and period-2 bulb membership test.
bool in_main_components(Complex c);

struct EscapeGrid {
  Viewport viewport;
  int max_iter = 0;
  double bailout = 2.0;
  std::vector<int> counts;     // row-major; max_iter marks non-escaped pixels
  std::vector<double> smooth;  // empty unless requested

  int count(std::size_t row, std::size_t col) const { return counts[row * viewport.cols + col]; }
};

struct NewtonResult {
  int label = -1;  // 0, 1, 2: root exp(2 pi i k / 3); -1 if not converged
  int iterations = 0;
  Complex z{0.0, 0.0};
  bool perturbed = false;  // start (or an iterate) sat on the singular point 0
};

Complex cube_root_of_unity(int k);

/// Newton's method for z^3 - 1 from z0, stopping when z is within tol of a root.
NewtonResult newton_point(Complex z0, int max_iter, double tol);

struct BasinGrid {
  Viewport viewport;
  int max_iter = 0;
  double tol = 0.0;
  std::vector<int> labels;      // row-major, {0, 1, 2, -1}
  std::vector<int> iterations;  // max_iter iff label == -1
  bool origin_perturbed = false;

  int label(std::size_t row, std::size_t col) const { return labels[row * viewport.cols + col]; }
};

struct JuliaJob {
  Complex c{0.0, 0.0};
  Viewport viewport;
  int max_iter = 256;
  double bailout = 2.0;
  bool smooth = false;
};

struct MandelbrotJob {
  Viewport viewport;
  int max_iter = 256;
  double bailout = 2.0;
  bool smooth = false;
  bool interior_check = false;  // skip iteration inside the cardioid and period-2 bulb
};

struct NewtonJob {
  Viewport viewport;
  int max_iter = 64;
  double tol = 1e-9;
};

using RenderJob = std::variant<JuliaJob, MandelbrotJob, NewtonJob>;
using RenderGrid = std::variant<EscapeGrid, BasinGrid>;

const Viewport& job_viewport(const RenderJob& job);

struct TileRect {
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Tiles covering the viewport in row-major tile order.
std::vector<TileRect> tile_rects(const Viewport& vp, std::size_t tile_size);

/// Grid of the right kind and size for the job, with every pixel unset.
RenderGrid allocate_grid(const RenderJob& job);

/// Computes one tile in place.
void render_tile(const RenderJob& job, const TileRect& tile, RenderGrid& grid);

/// Raised when a tile cannot be computed; carries the tile origin.
class TileFailure : public std::runtime_error {
 public:
  TileFailure(const TileRect& tile, const std::string& why);
  const TileRect& tile() const noexcept { return tile_; }

 private:
  TileRect tile_;
};

struct RenderStats {
  std::size_t pixels = 0;
  std::size_t tiles = 0;
  double seconds = 0.0;
  double pixels_per_second = 0.0;
};

struct RenderResult {
  RenderGrid grid;
  RenderStats stats;
};

/// Parallel tiled rendering over `workers` OpenMP threads (0: runtime default).
RenderResult render_tiles(const RenderJob& job, std::size_t tile_size = 64, int workers = 0);

namespace serial {
/// Pixel-by-pixel reference renderer.
RenderGrid render(const RenderJob& job);
}

EscapeGrid julia_grid(Complex c, const Viewport& vp, int max_iter);
EscapeGrid mandelbrot_grid(const Viewport& vp, int max_iter);
BasinGrid newton_basins(const Viewport& vp, int max_iter, double tol);

}  // namespace lab::fractal
