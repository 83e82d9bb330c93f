// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance --criterion N   run one criterion (exit status 1 on FAIL)
//   acceptance                 run all of them

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lab/arith.hpp"
#include "lab/flows.hpp"
#include "lab/fractal.hpp"
#include "lab/io.hpp"
#include "lab/lattice.hpp"
#include "lab/maps.hpp"
#include "lab/numerics.hpp"
#include "lab/turing.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Frozen from tests/oracles/superstable_oracle.py (60-digit bisection).
constexpr double kOracleDelta8 = 4.6691910024851;
constexpr double kOracleDelta9 = 4.66919947054773;

struct Outcome {
  bool pass = true;
  std::ostringstream notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes << " [failed: " << what << "]";
    }
  }
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

// 1 -------------------------------------------------------------------------

void fput_recurrence(Outcome& out) {
  using namespace lab::lattice;
  const FputParams params{32, 0.25, 0.05};
  FputRun run;
  try {
    run = fput_simulate(params, 1, 1.0, 10000.0, 1.0);
  } catch (const EnergyDriftError& e) {
    out.require(false, "energy drift " + fmt(e.drift()) + " at t=" + fmt(e.time()));
    return;
  }
  const auto& m = run.modes;
  std::size_t i = 0;
  while (i < m.times.size() && m.share(i, 1) >= 0.5) ++i;
  out.require(i < m.times.size(), "mode-1 share never drops below 0.5");
  if (i == m.times.size()) return;
  std::size_t j = i;
  while (j < m.times.size() && m.share(j, 1) <= 0.90) ++j;
  out.require(j < m.times.size(), "mode-1 share never returns above 0.90");
  out.notes << " share<0.5 at t=" << m.times[i];
  if (j < m.times.size()) out.notes << ", >0.90 again at t=" << m.times[j] << " (share " << fmt(m.share(j, 1), 4) << ")";
  out.notes << ", max drift " << fmt(run.max_relative_drift, 3);
  out.require(run.max_relative_drift < 1e-4, "energy drift");
}

// 2 -------------------------------------------------------------------------

void feigenbaum(Outcome& out) {
  using namespace lab::maps;
  const auto rs = superstable_params(10);
  out.require(rs.size() == 10, "ten superstable parameters");
  if (rs.size() != 10) return;
  out.require(rs[0] == 2.0, "R1 == 2");
  out.require(std::abs(rs[1] - (1.0 + std::sqrt(5.0))) < 1e-9, "R2 == 1 + sqrt 5");
  const auto d = feigenbaum_ratios(rs);
  const double a = d[d.size() - 2], b = d.back();
  out.notes << " delta_8=" << fmt(a, 10) << " delta_9=" << fmt(b, 10) << " (oracle " << fmt(kOracleDelta8, 10) << ", "
            << fmt(kOracleDelta9, 10) << ")";
  out.require(std::abs(a - b) < 1e-3, "final estimates agree within 1e-3");
  out.require(a >= 4.6 && a <= 4.75 && b >= 4.6 && b <= 4.75, "estimates in [4.6, 4.75]");
  out.require(std::abs(a - kOracleDelta8) < 1e-6 && std::abs(b - kOracleDelta9) < 1e-6, "oracle agreement");
}

// 3 -------------------------------------------------------------------------

void bsd_slopes(Outcome& out) {
  using namespace lab::arith;
  struct Case {
    std::int64_t d;
    double lo, hi;
    bool asserted;
  };
  const Case cases[] = {{1, -0.3, 0.3, true},
                        {5, 0.65, 1.35, true},
                        {34, 1.6, 2.4, true},
                        {1254, 0, 0, false},
                        {29274, 0, 0, false}};
  for (const auto& c : cases) {
    const auto series = product_series({c.d}, 100000, Count::Projective);
    const auto fit = rank_slope(series, 100);
    out.notes << " d=" << c.d << ":" << fmt(fit.slope, 3);
    if (c.asserted) out.require(fit.slope >= c.lo && fit.slope <= c.hi, "slope(d=" + std::to_string(c.d) + ")");
    for (std::int64_t p : primes_upto(199)) {
      if ((2 * c.d) % p == 0) continue;
      out.require(count_points_mod_p({c.d}, p) == count_points_brute({c.d}, p),
                  "brute-force count d=" + std::to_string(c.d) + " p=" + std::to_string(p));
    }
  }
}

// 4 -------------------------------------------------------------------------

void lorenz(Outcome& out) {
  using namespace lab::flows;
  const LorenzParams p;
  const double q = std::sqrt(72.0);
  const std::vector<lab::State> expected{{0.0, 0.0, 0.0}, {q, q, 27.0}, {-q, -q, 27.0}};
  const auto fps = lorenz_fixed_points(p);
  out.require(fps.size() == 3, "three fixed points");
  for (const auto& e : expected) {
    bool found = false;
    for (const auto& f : fps) {
      double diff = 0.0, field = 0.0;
      for (int k = 0; k < 3; ++k) diff = std::max(diff, std::abs(f[k] - e[k]));
      for (double x : lorenz_field(p, f)) field = std::max(field, std::abs(x));
      if (diff < 1e-12) {
        found = true;
        out.require(field < 1e-12, "fixed point is a zero of the field");
      }
    }
    out.require(found, "fixed point present");
  }

  const auto traj = lorenz_attractor(p, {1.0, 1.0, 1.0}, 0.01, 1000, 50000);
  bool inside = traj.size() == 50001;
  for (const auto& s : traj.states) {
    inside = inside && std::abs(s[0]) <= 25.0 && std::abs(s[1]) <= 35.0 && s[2] >= 0.0 && s[2] <= 55.0;
  }
  out.require(inside, "attractor inside |x|<=25, |y|<=35, 0<=z<=55");

  const auto sep = separation_growth(p, {1.0, 1.0, 1.0}, 1e-8, 0.01, 4000);
  const auto hit = std::find_if(sep.begin(), sep.end(), [](const auto& s) { return s.log10_separation >= 0.0; });
  out.require(hit != sep.end(), "separation reaches 1 by t=40");
  if (hit != sep.end()) out.notes << " separation >= 1 at t=" << fmt(hit->time, 4);

  LorenzParams sub = p;
  sub.r = 0.5;
  const auto decay = lorenz_attractor(sub, {0.5, -0.3, 0.2}, 0.01, 0, 5000);
  const auto& last = decay.states.back();
  const double norm = std::sqrt(last[0] * last[0] + last[1] * last[1] + last[2] * last[2]);
  out.notes << ", |s(50)| at r=0.5: " << fmt(norm, 3);
  out.require(norm < 1e-6, "r=0.5 decays to the origin");
}

// 5 -------------------------------------------------------------------------

void henon_map(Outcome& out) {
  using namespace lab::maps;
  const HenonParams p{1.4, 0.3};
  const auto fps = henon_fixed_points(p);
  const double disc = std::sqrt((1.0 - p.b) * (1.0 - p.b) + 4.0 * p.a);
  const double xs[] = {(-(1.0 - p.b) - disc) / (2.0 * p.a), (-(1.0 - p.b) + disc) / (2.0 * p.a)};
  out.require(fps.size() == 2, "two fixed points");
  for (std::size_t i = 0; i < std::min<std::size_t>(2, fps.size()); ++i) {
    out.require(std::abs(fps[i].x - xs[i]) < 1e-10 && std::abs(fps[i].y - p.b * xs[i]) < 1e-10,
                "fixed point matches the quadratic formula");
  }

  const auto orbit = henon_orbit(p, {0.0, 0.0}, 100, 10000);
  bool inside = orbit.size() == 10000;
  double worst = 0.0;
  for (const auto& pt : orbit) {
    inside = inside && std::abs(pt.x) <= 1.5 && std::abs(pt.y) <= 0.45;
    const auto back = henon_inverse(p, henon(p, pt));
    worst = std::max({worst, std::abs(back.x - pt.x), std::abs(back.y - pt.y)});
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 10000; ++i) {
    const Point2 s{u(rng), 0.3 * u(rng)};
    const auto back = henon_inverse(p, henon(p, s));
    worst = std::max({worst, std::abs(back.x - s.x), std::abs(back.y - s.y)});
  }
  out.require(inside, "orbit inside |x|<=1.5, |y|<=0.45");
  out.notes << " inverse round-trip error " << fmt(worst, 3);
  out.require(worst < 1e-10, "invertibility");
}

// 6 -------------------------------------------------------------------------

double total(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void kdv(Outcome& out) {
  using namespace lab::lattice;
  const auto p = KdvParams::make(0.022, 256, 1e-4);
  const auto init = cosine_profile(256);
  const auto h = kdv_simulate(p, init, 3.6, 0.3);
  double l1 = 0.0;
  for (double x : init) l1 += std::abs(x);
  double worst = 0.0;
  for (const auto& f : h.fields) worst = std::max(worst, std::abs(total(f) - total(init)) / l1);
  out.require(worst < 1e-10, "mass conservation");
  const auto pulses = detect_pulses(h.fields.back(), p.dx, 1.0);
  out.notes << " mass error " << fmt(worst, 3) << ", " << pulses.size() << " pulses at t=3.6";
  out.require(pulses.size() >= 2, "at least two pulses");

  const std::size_t n = 512;
  const auto q = KdvParams::make(0.022, n, 2.5e-5);
  auto pair = soliton_profile(n, 2.0, 0.022, 0.6, 0.4);
  const auto slow = soliton_profile(n, 2.0, 0.022, 0.2, 1.0);
  for (std::size_t i = 0; i < n; ++i) pair[i] += slow[i];
  const auto c = kdv_simulate(q, pair, 3.0, 0.1);
  auto before = detect_pulses(c.fields[4], q.dx, 0.3);
  auto after = detect_pulses(c.fields.back(), q.dx, 0.3);
  out.require(before.size() == 2 && after.size() == 2, "two pulses before and after the collision");
  if (before.size() != 2 || after.size() != 2) return;
  const auto by_height = [](const Pulse& a, const Pulse& b) { return a.height < b.height; };
  std::sort(before.begin(), before.end(), by_height);
  std::sort(after.begin(), after.end(), by_height);
  for (int k = 0; k < 2; ++k) {
    const double rel = std::abs(after[k].height - before[k].height) / before[k].height;
    out.notes << ", height " << fmt(before[k].height, 4) << "->" << fmt(after[k].height, 4);
    out.require(rel <= 0.05, "collision height within 5%");
  }
}

// 7 -------------------------------------------------------------------------

void turing(Outcome& out) {
  using namespace lab::turing;
  for (Coupling cp : {Coupling::Inhibitor, Coupling::Verbatim}) {
    TuringParams p;
    p.coupling = cp;
    Field2D u(p.nx, p.ny, p.dx, kSteadyU), v(p.nx, p.ny, p.dx, kSteadyV);
    for (int i = 0; i < 100; ++i) std::tie(u, v) = turing_step(u, v, p);
    const bool fixed = std::all_of(u.values.begin(), u.values.end(), [](double x) { return x == kSteadyU; }) &&
                       std::all_of(v.values.begin(), v.values.end(), [](double x) { return x == kSteadyV; });
    out.require(fixed, "(16, 1) is an exact fixed point");
  }

  const TuringParams p;
  const auto snaps = turing_simulate(p, 7, 0.01, 20000, 1000);
  const double s0 = pattern_stats(snaps.front().u).std;
  double peak = 0.0;
  for (const auto& s : snaps) peak = std::max(peak, pattern_stats(s.u).std);
  const double growth = peak / s0;
  const double final_ratio = pattern_stats(snaps.back().u).std / s0;
  std::vector<double> As{0.0, 1e-3, 0.01, 0.05, 0.1, 0.5, 1, 2, 5};
  std::vector<double> Bs{0.0, 0.01, 0.1, 1, 2, 5, 10, 20, 50, 100};
  const auto inh = scan_instability(As, Bs, 64, 64, 1.0, Coupling::Inhibitor);
  const auto verb = scan_instability(As, Bs, 64, 64, 1.0, Coupling::Verbatim);
  out.notes << " std(u) growth at A=" << p.A << ", B=" << p.B << ": peak " << fmt(growth, 4)
            << "x, final " << fmt(final_ratio, 3) << "x after 20000 steps; max linear growth rate over A in [0,5], B in [0,100]: " << fmt(inh.max_growth, 4)
            << " (verbatim " << fmt(verb.max_growth, 4) << ")";
  out.require(growth >= 10.0, "std(u) grows 10x");

  TuringParams local;
  local.A = 0.0;
  local.B = 0.0;
  Field2D u(local.nx, local.ny, local.dx, kSteadyU), v(local.nx, local.ny, local.dx, kSteadyV);
  u.at(5, 7) = 16.1;
  Field2D ru = u, rv = v;
  ru.at(5, 7) = kSteadyU;
  for (int i = 0; i < 200; ++i) {
    std::tie(u, v) = turing_step(u, v, local);
    std::tie(ru, rv) = turing_step(ru, rv, local);
  }
  bool same = true;
  for (std::size_t r = 0; r < local.ny; ++r) {
    for (std::size_t c = 0; c < local.nx; ++c) {
      if (r == 5 && c == 7) continue;
      same = same && u.at(r, c) == ru.at(r, c) && v.at(r, c) == rv.at(r, c);
    }
  }
  out.require(same, "zero-diffusion locality");
}

// 8 -------------------------------------------------------------------------

void complex_dynamics(Outcome& out) {
  using namespace lab::fractal;
  out.require(escape_time({0.0, 0.0}, {0.0, 0.0}, 100).count == 100, "c=0 never escapes");
  const auto one = escape_time({1.0, 0.0}, {0.0, 0.0}, 100);
  out.require(one.count == 4 && one.final_z == Complex(5.0, 0.0), "c=1 escapes at the fourth term");
  const auto tip = escape_time({-2.0, 0.0}, {0.0, 0.0}, 100);
  out.require(tip.count == 100 && tip.final_z == Complex(2.0, 0.0), "c=-2 stays on the boundary");

  const Complex omega = cube_root_of_unity(1);
  const std::pair<Complex, int> starts[] = {{{1.0, 0.0}, 0}, {{2.0, 0.0}, 0}, {omega * 1.5, 1}};
  const double tol = 1e-9;
  for (const auto& [z0, label] : starts) {
    const auto r = newton_point(z0, 64, tol);
    out.require(r.label == label, "newton basin label");
    out.require(std::abs(r.z * r.z * r.z - 1.0) < 3.0 * tol * std::norm(r.z) + tol, "newton residual bound");
  }

  const Timer timer;
  const std::size_t cols = 512, rows = 384;
  const MandelbrotJob mj{{{-0.5, 0.0}, 3.0, cols, rows}, 500};
  const JuliaJob jj{{-0.8, 0.156}, {{0.0, 0.0}, 3.2, cols, rows}, 500};
  const NewtonJob nj{{{0.0, 0.0}, 4.0, cols, rows}, 64, tol};
  const auto m1 = render_tiles(mj, 64, 1), m8 = render_tiles(mj, 64, 8);
  const auto j1 = render_tiles(jj, 64, 1), j8 = render_tiles(jj, 64, 8);
  const auto n1 = render_tiles(nj, 64, 1), n8 = render_tiles(nj, 64, 8);
  const double render_seconds = timer.seconds();

  const auto& mg = std::get<EscapeGrid>(m1.grid);
  const auto& jg = std::get<EscapeGrid>(j1.grid);
  bool conj = true, rot = true;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      conj = conj && mg.count(r, c) == mg.count(rows - 1 - r, c);
      rot = rot && jg.count(r, c) == jg.count(rows - 1 - r, cols - 1 - c);
    }
  }
  out.require(conj, "mandelbrot conjugation symmetry");
  out.require(rot, "julia rotation symmetry");
  out.require(mg.counts == std::get<EscapeGrid>(m8.grid).counts, "mandelbrot 1 vs 8 workers");
  out.require(jg.counts == std::get<EscapeGrid>(j8.grid).counts, "julia 1 vs 8 workers");
  const auto& nb1 = std::get<BasinGrid>(n1.grid);
  const auto& nb8 = std::get<BasinGrid>(n8.grid);
  out.require(nb1.labels == nb8.labels && nb1.iterations == nb8.iterations, "newton 1 vs 8 workers");
  out.notes << " six 512x384 frames at max_iter 500 in " << fmt(render_seconds, 3) << " s";
  out.require(render_seconds < 30.0, "render time");
}

// 9 -------------------------------------------------------------------------

struct SectionCheck {
  std::size_t points = 0;
  std::size_t checked = 0;
  bool match = true;
  double off_plane = 0.0;
  double energy_err = 0.0;
};

// Recomputes every seed's crossings from a stored trajectory and compares them
// with the section, checking the full interpolated crossing state.
SectionCheck check_section(double e, double dt, std::size_t crossings) {
  using namespace lab::flows;
  SectionCheck r;
  const auto sec = hh_section(e, 9, crossings, dt, SeedRule::Grid);
  r.points = sec.points.size();
  const auto seeds = hh_seed_candidates(e, 9, SeedRule::Grid);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto start = hh_seed(e, seeds[i].first, seeds[i].second);
    if (!start) continue;
    const auto traj = lab::integrate(hh_field, start->to_state(), dt, static_cast<std::size_t>(10.0 * crossings / dt));
    const auto cs = lab::poincare_crossings(traj, {0, 0.0, lab::Direction::Up});
    std::vector<SectionPoint> mine;
    for (const auto& pt : sec.points) {
      if (pt.seed == i) mine.push_back(pt);
    }
    r.match = r.match && mine.size() == crossings && cs.size() >= crossings;
    for (std::size_t k = 0; k < std::min(cs.size(), mine.size()); ++k) {
      const auto& s = cs[k].state;
      r.match = r.match && s[1] == mine[k].y && s[3] == mine[k].py && s[2] > 0.0;
      r.off_plane = std::max(r.off_plane, std::abs(s[0]));
      r.energy_err = std::max(r.energy_err, std::abs(hh_energy(HHState::from_state(s)) - e));
      ++r.checked;
    }
  }
  return r;
}

void henon_heiles(Outcome& out) {
  using namespace lab::flows;
  for (double e : {1.0 / 24.0, 1.0 / 12.0, 1.0 / 8.0}) {
    const auto seed = hh_seed(e, 0.1, 0.0);
    out.require(seed.has_value(), "feasible seed");
    if (!seed) continue;
    lab::State s = seed->to_state();
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
      s = lab::rk4_step(hh_field, s, 1e-3);
      worst = std::max(worst, std::abs(hh_energy(HHState::from_state(s)) - e) / e);
    }
    out.notes << " E=" << fmt(e, 4) << ": drift " << fmt(worst, 3);
    out.require(worst < 1e-6, "energy drift");

    // Plane tolerance at the manifest step; |H - E| at the integrator's reference step.
    const auto coarse = check_section(e, 0.01, 200);
    const auto fine = check_section(e, 1e-3, 20);
    out.notes << ", dt=0.01 section " << coarse.checked << " pts max |x| " << fmt(coarse.off_plane, 3) << " max |H-E| "
              << fmt(coarse.energy_err, 3) << ", dt=1e-3 section max |H-E| " << fmt(fine.energy_err, 3) << ";";
    for (const auto* c : {&coarse, &fine}) {
      out.require(c->checked == c->points && c->match, "section matches an independent crossing scan");
      out.require(c->off_plane <= 1e-12, "crossing on the section plane");
    }
    out.require(fine.energy_err < 1e-6, "crossing energy within 1e-6");
  }
}

// 10 ------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

void cli_determinism(Outcome& out) {
  const fs::path root = fs::temp_directory_path() / ("lab-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<fs::path> manifests;
  for (const auto& e : fs::directory_iterator(MANIFEST_DIR)) {
    if (e.path().extension() == ".json") manifests.push_back(e.path());
  }
  std::sort(manifests.begin(), manifests.end());
  out.require(!manifests.empty(), "manifests present");

  struct Variant {
    std::string name, env, args;
  };
  const Variant variants[] = {{"run1", "", ""},
                              {"run2", "", ""},
                              {"threads1", "", "--threads 1"},
                              {"threads4", "", "--threads 4"},
                              {"env3", "LAB_THREADS=3 ", ""}};
  for (const auto& m : manifests) {
    const std::string name = m.stem().string();
    std::map<std::string, std::string> reference;
    for (const auto& v : variants) {
      const fs::path dir = root / name / v.name;
      fs::create_directories(dir);
      const std::string cmd = v.env + "\"" + LAB_BIN + "\" --manifest \"" + m.string() + "\" --out-dir \"" +
                              dir.string() + "\" " + v.args + " > /dev/null";
      if (std::system(cmd.c_str()) != 0) {
        out.require(false, name + " " + v.name + " exited nonzero");
        continue;
      }
      const auto files = snapshot(dir);
      if (reference.empty()) {
        reference = files;
        const json report = json::parse(files.at("run_report.json"));
        for (const auto& o : report.at("outputs")) {
          const auto it = files.find(o.at("path").get<std::string>());
          out.require(it != files.end() && lab::io::sha256_hex(it->second) == o.at("sha256").get<std::string>() &&
                          it->second.size() == o.at("bytes").get<std::size_t>(),
                      name + " report digest of " + o.at("path").get<std::string>());
        }
      } else {
        out.require(files == reference, name + " " + v.name + " differs from run1");
      }
    }
    out.notes << " " << name << ":" << reference.size() << " files";
  }
  fs::remove_all(root);
}

struct Criterion {
  const char* title;
  double budget_seconds;
  std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"FPUT recurrence", 60.0, fput_recurrence},
      {"Feigenbaum cascade", 30.0, feigenbaum},
      {"elliptic-curve product slopes", 120.0, bsd_slopes},
      {"Lorenz system", 30.0, lorenz},
      {"Henon map", 5.0, henon_map},
      {"KdV solitons", 120.0, kdv},
      {"Turing patterns", 60.0, turing},
      {"complex dynamics", 30.0, complex_dynamics},
      {"Henon-Heiles", 60.0, henon_heiles},
      {"CLI determinism", 0.0, cli_determinism},
  };
  return all;
}

bool run_one(std::size_t n) {
  const auto& c = criteria().at(n - 1);
  Outcome out;
  const Timer timer;
  try {
    c.run(out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  const double secs = timer.seconds();
  if (c.budget_seconds > 0.0) out.require(secs < c.budget_seconds, "runtime budget " + fmt(c.budget_seconds) + " s");
  std::cout << "criterion " << n << ": " << (out.pass ? "PASS" : "FAIL") << "  " << c.title << "  (" << fmt(secs, 3)
            << " s)" << out.notes.str() << std::endl;
  return out.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the lab kernels and CLI.", "acceptance"};
  std::size_t which = 0;
  app.add_option("--criterion", which, "Criterion to run (1-10); all when omitted")
      ->check(CLI::Range(std::size_t{1}, criteria().size()));
  CLI11_PARSE(app, argc, argv);

  bool ok = true;
  if (which != 0) {
    ok = run_one(which);
  } else {
    for (std::size_t n = 1; n <= criteria().size(); ++n) ok = run_one(n) && ok;
  }
  return ok ? 0 : 1;
}
