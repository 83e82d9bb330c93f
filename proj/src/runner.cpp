#include "lab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "lab/arith.hpp"
#include "lab/flows.hpp"
#include "lab/fractal.hpp"
#include "lab/io.hpp"
#include "lab/lattice.hpp"
#include "lab/maps.hpp"
#include "lab/turing.hpp"

#ifndef LAB_VERSION
#define LAB_VERSION "0.0.0"
#endif

namespace lab::run {

using schema::SchemaError;

std::string version() { return LAB_VERSION; }

Manifest parse_manifest(const json& doc) {
  if (!doc.is_object()) throw SchemaError("invalid_manifest", "", "manifest must be a JSON object");
  static const std::set<std::string> known{"experiment", "params", "outputs", "seed"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw SchemaError("invalid_manifest", key, "unknown manifest key '" + key + "'");
  }
  Manifest m;
  if (!doc.contains("experiment") || !doc["experiment"].is_string()) {
    throw SchemaError("invalid_manifest", "experiment", "manifest needs an \"experiment\" string");
  }
  m.experiment = doc["experiment"].get<std::string>();
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) throw SchemaError("invalid_manifest", "params", "\"params\" must be an object");
    m.params = doc["params"];
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer() || doc["seed"].get<std::int64_t>() < 0) throw SchemaError("invalid_manifest", "seed", "\"seed\" must be a non-negative integer");
    m.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("outputs")) {
    if (!doc["outputs"].is_array()) throw SchemaError("invalid_manifest", "outputs", "\"outputs\" must be an array");
    for (const auto& o : doc["outputs"]) {
      if (!o.is_object() || !o.contains("kind") || !o["kind"].is_string()) {
        throw SchemaError("invalid_manifest", "outputs", "each output needs a \"kind\" string");
      }
      OutputSpec s{o["kind"].get<std::string>(), ""};
      if (o.contains("path")) {
        if (!o["path"].is_string()) throw SchemaError("invalid_manifest", "outputs", "output \"path\" must be a string");
        s.path = o["path"].get<std::string>();
      }
      m.outputs.push_back(std::move(s));
    }
  }
  return m;
}

namespace {

const std::map<std::string, std::vector<OutputSpec>>& output_table() {
  static const std::map<std::string, std::vector<OutputSpec>> t{
      {"lorenz", {{"trajectory", "trajectory.csv"}, {"separation", "separation.csv"}}},
      {"henon-heiles", {{"section", "section.csv"}}},
      {"fput", {{"modes", "mode_energies.csv"}, {"displacements", "displacements.csv"}}},
      {"kdv", {{"field", "field.csv"}, {"pulses", "pulses.csv"}}},
      {"turing", {{"stats", "stats.csv"}, {"u", "u.pgm"}, {"v", "v.pgm"}}},
      {"logistic", {{"bifurcation", "bifurcation.csv"}, {"diagram", "bifurcation.pgm"}, {"cascade", "cascade.csv"}}},
      {"henon", {{"orbit", "orbit.csv"}}},
      {"julia", {{"counts", "counts.pgm"}, {"image", "image.ppm"}}},
      {"mandelbrot", {{"counts", "counts.pgm"}, {"image", "image.ppm"}}},
      {"newton", {{"basins", "basins.ppm"}, {"labels", "labels.pgm"}, {"iterations", "iterations.pgm"}}},
      {"bsd", {{"series", "series.csv"}}},
  };
  return t;
}

// Outputs written when the manifest does not list any. Optional extras
// (displacements, separation, cascade) appear only when their inputs ask for them.
bool default_on(const std::string& experiment, const std::string& kind, const json& p) {
  if (experiment == "fput" && kind == "displacements") return false;
  if (experiment == "lorenz" && kind == "separation") return p["delta0"].get<double>() > 0.0;
  if (experiment == "logistic" && kind == "cascade") return p["cascade"].get<int>() > 0;
  return true;
}

double num(const json& p, const char* key) { return p.at(key).get<double>(); }
std::int64_t inum(const json& p, const char* key) { return p.at(key).get<std::int64_t>(); }
std::size_t size(const json& p, const char* key) { return static_cast<std::size_t>(p.at(key).get<std::int64_t>()); }
std::string str(const json& p, const char* key) { return p.at(key).get<std::string>(); }

// Collects encoded outputs lazily; only requested kinds are encoded.
class Sink {
 public:
  explicit Sink(const std::vector<OutputSpec>& wanted) : wanted_(wanted) {}

  bool wants(const std::string& kind) const {
    return std::any_of(wanted_.begin(), wanted_.end(), [&](const OutputSpec& o) { return o.kind == kind; });
  }

  void add(const std::string& kind, const std::function<std::string()>& encode) {
    std::string bytes;
    bool encoded = false;
    for (const auto& o : wanted_) {
      if (o.kind != kind) continue;
      if (!encoded) {
        bytes = encode();
        encoded = true;
      }
      files_.push_back({o.kind, o.path, bytes});
    }
  }

  std::vector<OutputFile> take() {
    // Keep the manifest's order so reports are stable.
    std::vector<OutputFile> out;
    for (const auto& o : wanted_) {
      for (const auto& f : files_) {
        if (f.kind == o.kind && f.path == o.path) {
          out.push_back(f);
          break;
        }
      }
    }
    return out;
  }

 private:
  const std::vector<OutputSpec>& wanted_;
  std::vector<OutputFile> files_;
};

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// --- experiments -------------------------------------------------------------

void run_lorenz(const json& p, Sink& sink, json& summary) {
  const flows::LorenzParams lp{num(p, "sigma"), num(p, "r"), num(p, "b")};
  const State s0{num(p, "x0"), num(p, "y0"), num(p, "z0")};
  const double dt = num(p, "dt");
  const auto traj = flows::lorenz_attractor(lp, s0, dt, size(p, "transient"), size(p, "steps"));
  const std::size_t every = size(p, "record_every");
  summary["samples"] = traj.size();
  summary["final_state"] = traj.states.back();
  sink.add("trajectory", [&] {
    io::Column t{"t", {}}, x{"x", {}}, y{"y", {}}, z{"z", {}};
    for (std::size_t i = 0; i < traj.size(); i += every) {
      t.values.push_back(traj.times[i]);
      x.values.push_back(traj.states[i][0]);
      y.values.push_back(traj.states[i][1]);
      z.values.push_back(traj.states[i][2]);
    }
    return io::encode_csv({t, x, y, z});
  });
  if (num(p, "delta0") > 0.0 || sink.wants("separation")) {
    const auto sep = flows::separation_growth(lp, traj.states.front(), num(p, "delta0"), dt, size(p, "steps"));
    double reach = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : sep) {
      if (s.log10_separation >= 0.0) {
        reach = s.time;
        break;
      }
    }
    summary["separation_reaches_one_at"] = finite_or_null(reach);
    sink.add("separation", [&] {
      io::Column t{"t", {}}, l{"log10_separation", {}};
      for (std::size_t i = 0; i < sep.size(); i += every) {
        t.values.push_back(sep[i].time);
        l.values.push_back(sep[i].log10_separation);
      }
      return io::encode_csv({t, l});
    });
  }
}

void run_henon_heiles(const json& p, int threads, Sink& sink, json& summary) {
  const auto rule = flows::parse_seed_rule(str(p, "seed_rule"));
  flows::SectionOptions opts;
  opts.escape_radius = num(p, "escape_radius");
  opts.threads = threads;
  const double e = num(p, "energy");
  const auto sec = flows::hh_section(e, size(p, "seeds"), size(p, "crossings"), num(p, "dt"), *rule, opts);
  summary["points"] = sec.points.size();
  summary["seed_count"] = sec.seed_count;
  summary["skipped_seeds"] = sec.skipped_seeds;
  summary["escaped_seeds"] = sec.escaped_seeds;
  sink.add("section", [&] {
    io::Column s{"seed", {}}, y{"y", {}}, py{"py", {}};
    for (const auto& pt : sec.points) {
      s.values.push_back(static_cast<double>(pt.seed));
      y.values.push_back(pt.y);
      py.values.push_back(pt.py);
    }
    return io::encode_csv({s, y, py});
  });
}

void run_fput(const json& p, Sink& sink, json& summary) {
  lattice::FputParams fp;
  fp.n_masses = size(p, "n_masses");
  fp.alpha = num(p, "alpha");
  fp.dt = num(p, "dt");
  const auto run = lattice::fput_simulate(fp, size(p, "mode"), num(p, "amplitude"), num(p, "t_end"), num(p, "record_dt"),
                                          num(p, "max_drift"));
  const std::size_t mode = size(p, "mode");
  double min_share = 1.0;
  for (std::size_t i = 0; i < run.modes.times.size(); ++i) min_share = std::min(min_share, run.modes.share(i, mode));
  summary["initial_energy"] = run.initial_energy;
  summary["max_relative_drift"] = run.max_relative_drift;
  summary["min_mode_share"] = min_share;
  const auto rec = run.initial_energy > 0.0 ? lattice::recurrence_time(run.modes, mode) : std::nullopt;
  summary["recurrence_time"] = rec ? json(*rec) : json(nullptr);
  sink.add("modes", [&] {
    std::vector<io::Column> cols{{"t", run.modes.times}};
    for (std::size_t k = 1; k <= run.modes.k_max; ++k) {
      io::Column c{"E" + std::to_string(k), {}};
      for (const auto& e : run.modes.energies) c.values.push_back(e[k - 1]);
      cols.push_back(std::move(c));
    }
    return io::encode_csv(cols);
  });
  sink.add("displacements", [&] {
    std::vector<io::Column> cols{{"t", run.history.times}};
    for (std::size_t j = 0; j <= fp.n_masses; ++j) {
      io::Column c{"u" + std::to_string(j), {}};
      for (const auto& f : run.history.fields) c.values.push_back(f[j]);
      cols.push_back(std::move(c));
    }
    return io::encode_csv(cols);
  });
}

std::vector<double> kdv_initial(const json& p, const lattice::KdvParams& kp) {
  const std::size_t n = kp.points();
  if (str(p, "init") == "cosine") return lattice::cosine_profile(n, kp.length);
  auto v = lattice::soliton_profile(n, kp.length, kp.delta, 0.6, 0.2 * kp.length);
  const auto slow = lattice::soliton_profile(n, kp.length, kp.delta, 0.2, 0.5 * kp.length);
  for (std::size_t i = 0; i < n; ++i) v[i] += slow[i];
  return v;
}

void run_kdv(const json& p, int threads, Sink& sink, json& summary) {
  const auto kp = lattice::KdvParams::make(num(p, "delta"), size(p, "n_points"), num(p, "dt"), num(p, "length"));
  const auto init = kdv_initial(p, kp);
  const auto hist = lattice::kdv_simulate(kp, init, num(p, "t_end"), num(p, "record_dt"), threads);
  double l1 = 0.0, mass0 = 0.0, worst = 0.0;
  for (double x : init) {
    l1 += std::abs(x);
    mass0 += x;
  }
  for (const auto& f : hist.fields) {
    double m = 0.0;
    for (double x : f) m += x;
    worst = std::max(worst, std::abs(m - mass0));
  }
  const double min_h = num(p, "min_height");
  const auto last = lattice::detect_pulses(hist.fields.back(), kp.dx, min_h);
  summary["snapshots"] = hist.times.size();
  summary["mass_drift_relative_to_l1"] = l1 > 0.0 ? worst / l1 : 0.0;
  summary["final_pulse_count"] = last.size();
  sink.add("field", [&] {
    io::Column t{"t", {}}, x{"x", {}}, v{"v", {}};
    for (std::size_t k = 0; k < hist.times.size(); ++k) {
      for (std::size_t i = 0; i < hist.fields[k].size(); ++i) {
        t.values.push_back(hist.times[k]);
        x.values.push_back(static_cast<double>(i) * kp.dx);
        v.values.push_back(hist.fields[k][i]);
      }
    }
    return io::encode_csv({t, x, v});
  });
  sink.add("pulses", [&] {
    io::Column t{"t", {}}, x{"position", {}}, h{"height", {}};
    for (std::size_t k = 0; k < hist.times.size(); ++k) {
      for (const auto& pulse : lattice::detect_pulses(hist.fields[k], kp.dx, min_h)) {
        t.values.push_back(hist.times[k]);
        x.values.push_back(pulse.position);
        h.values.push_back(pulse.height);
      }
    }
    return io::encode_csv({t, x, h});
  });
}

std::string field_pgm(const turing::Field2D& f) {
  const auto st = turing::pattern_stats(f);
  const double span = st.max - st.min;
  std::vector<int> px(f.values.size(), 0);
  if (span > 0.0) {
    for (std::size_t i = 0; i < px.size(); ++i) {
      px[i] = static_cast<int>(std::lround(255.0 * (f.values[i] - st.min) / span));
    }
  }
  return io::encode_pgm(px, f.nx, f.ny, 255);
}

turing::TuringParams turing_params(const json& p) {
  turing::TuringParams tp;
  tp.A = num(p, "A");
  tp.B = num(p, "B");
  tp.dt = num(p, "dt");
  tp.dx = num(p, "dx");
  tp.nx = size(p, "nx");
  tp.ny = size(p, "ny");
  tp.coupling = *turing::parse_coupling(str(p, "coupling"));
  return tp;
}

void run_turing(const json& p, std::uint64_t seed, int threads, Sink& sink, json& summary) {
  const auto tp = turing_params(p);
  tp.validate();
  auto [u, v] = turing::initial_state(tp, seed, num(p, "noise"));
  if (num(p, "perturb_amp") != 0.0) {
    const std::size_t col = size(p, "perturb_x"), row = size(p, "perturb_y");
    if (col >= tp.nx || row >= tp.ny) {
      throw SchemaError("invalid_value", col >= tp.nx ? "perturb_x" : "perturb_y", "perturbation lies outside the grid");
    }
    u.at(row, col) += num(p, "perturb_amp");
  }
  const std::size_t steps = size(p, "steps"), every = size(p, "record_every");
  io::Column st{"step", {}}, mean{"mean_u", {}}, sd{"std_u", {}}, lo{"min_u", {}}, hi{"max_u", {}};
  auto record = [&](std::size_t k) {
    const auto s = turing::pattern_stats(u);
    st.values.push_back(static_cast<double>(k));
    mean.values.push_back(s.mean);
    sd.values.push_back(s.std);
    lo.values.push_back(s.min);
    hi.values.push_back(s.max);
  };
  record(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    try {
      std::tie(u, v) = turing::turing_step(u, v, tp, threads);
    } catch (const StepFailure& e) {
      throw e.at_step(k);
    }
    if (k % every == 0) record(k);
  }
  summary["initial_std_u"] = sd.values.front();
  summary["final_std_u"] = sd.values.back();
  summary["max_std_u"] = *std::max_element(sd.values.begin(), sd.values.end());
  sink.add("stats", [&] { return io::encode_csv({st, mean, sd, lo, hi}); });
  sink.add("u", [&] { return field_pgm(u); });
  sink.add("v", [&] { return field_pgm(v); });
}

void run_logistic(const json& p, int threads, Sink& sink, json& summary) {
  const std::size_t n_r = size(p, "n_r"), samples = size(p, "samples");
  const auto cloud = maps::bifurcation_diagram(num(p, "r_min"), num(p, "r_max"), n_r, size(p, "transient"), samples,
                                               num(p, "x0"), threads);
  summary["points"] = cloud.points.size();
  sink.add("bifurcation", [&] {
    io::Column r{"r", {}}, x{"x", {}};
    for (const auto& pt : cloud.points) {
      r.values.push_back(pt.r);
      x.values.push_back(pt.x);
    }
    return io::encode_csv({r, x});
  });
  sink.add("diagram", [&] {
    // Column per r value, x = 1 at the top row.
    const std::size_t rows = 256;
    std::vector<int> px(rows * n_r, 0);
    for (std::size_t c = 0; c < n_r; ++c) {
      for (std::size_t s = 0; s < samples; ++s) {
        const double x = cloud.points[c * samples + s].x;
        const auto row = static_cast<std::size_t>(std::min<double>(rows - 1, std::floor((1.0 - x) * rows)));
        px[row * n_r + c] = 255;
      }
    }
    return io::encode_pgm(px, n_r, rows, 255);
  });
  const std::size_t cascade = size(p, "cascade");
  if (cascade > 0) {
    const auto rs = maps::superstable_params(cascade);
    summary["superstable"] = rs;
    summary["feigenbaum_ratios"] = maps::feigenbaum_ratios(rs);
    sink.add("cascade", [&] {
      io::Column m{"m", {}}, r{"R", {}};
      for (std::size_t i = 0; i < rs.size(); ++i) {
        m.values.push_back(static_cast<double>(i + 1));
        r.values.push_back(rs[i]);
      }
      return io::encode_csv({m, r});
    });
  }
}

void run_henon(const json& p, Sink& sink, json& summary) {
  const maps::HenonParams hp{num(p, "a"), num(p, "b")};
  const auto orbit = maps::henon_orbit(hp, {num(p, "x0"), num(p, "y0")}, size(p, "transient"), size(p, "iterations"));
  json fps = json::array();
  if (hp.a != 0.0) {
    for (const auto& fp : maps::henon_fixed_points(hp)) fps.push_back({fp.x, fp.y});
  }
  summary["fixed_points"] = fps;
  summary["iterations"] = orbit.size();
  sink.add("orbit", [&] {
    io::Column x{"x", {}}, y{"y", {}};
    for (const auto& pt : orbit) {
      x.values.push_back(pt.x);
      y.values.push_back(pt.y);
    }
    return io::encode_csv({x, y});
  });
}

fractal::Viewport viewport(const json& p) {
  return {{num(p, "center_re"), num(p, "center_im")}, num(p, "width"), size(p, "cols"), size(p, "rows")};
}

void emit_escape(const json& p, const fractal::EscapeGrid& g, Sink& sink, json& summary) {
  const auto interior = std::count(g.counts.begin(), g.counts.end(), g.max_iter);
  summary["interior_pixels"] = interior;
  summary["pixels"] = g.counts.size();
  sink.add("counts", [&] {
    if (g.max_iter > 65535) throw SchemaError("invalid_value", "max_iter", "counts image needs max_iter <= 65535");
    return io::encode_pgm(g.counts, g.viewport.cols, g.viewport.rows, g.max_iter);
  });
  sink.add("image", [&] {
    std::vector<double> values(g.smooth.empty() ? std::vector<double>(g.counts.begin(), g.counts.end()) : g.smooth);
    return io::encode_ppm(io::colorize_escape(str(p, "palette"), values, g.max_iter), g.viewport.cols, g.viewport.rows);
  });
}

void run_julia(const json& p, int threads, Sink& sink, json& summary) {
  const bool smooth = p["smooth"].get<bool>();
  const fractal::JuliaJob job{{num(p, "c_re"), num(p, "c_im")}, viewport(p), static_cast<int>(inum(p, "max_iter")),
                              smooth ? std::max(num(p, "bailout"), fractal::kSmoothBailout) : num(p, "bailout"), smooth};
  const auto out = fractal::render_tiles(job, size(p, "tile_size"), threads);
  emit_escape(p, std::get<fractal::EscapeGrid>(out.grid), sink, summary);
}

void run_mandelbrot(const json& p, int threads, Sink& sink, json& summary) {
  const bool smooth = p["smooth"].get<bool>();
  const fractal::MandelbrotJob job{viewport(p), static_cast<int>(inum(p, "max_iter")),
                                   smooth ? std::max(num(p, "bailout"), fractal::kSmoothBailout) : num(p, "bailout"),
                                   smooth, p["interior_check"].get<bool>()};
  const auto out = fractal::render_tiles(job, size(p, "tile_size"), threads);
  emit_escape(p, std::get<fractal::EscapeGrid>(out.grid), sink, summary);
}

void run_newton(const json& p, int threads, Sink& sink, json& summary) {
  const fractal::NewtonJob job{viewport(p), static_cast<int>(inum(p, "max_iter")), num(p, "tol")};
  const auto out = fractal::render_tiles(job, size(p, "tile_size"), threads);
  const auto& g = std::get<fractal::BasinGrid>(out.grid);
  json counts = json::object();
  for (int label : {-1, 0, 1, 2}) counts[std::to_string(label)] = std::count(g.labels.begin(), g.labels.end(), label);
  summary["label_counts"] = counts;
  summary["origin_perturbed"] = g.origin_perturbed;
  sink.add("basins", [&] {
    return io::encode_ppm(io::colorize_basins(g.labels, g.iterations, g.max_iter), g.viewport.cols, g.viewport.rows);
  });
  sink.add("labels", [&] {
    std::vector<int> shifted(g.labels.size());
    std::transform(g.labels.begin(), g.labels.end(), shifted.begin(), [](int l) { return l + 1; });
    return io::encode_pgm(shifted, g.viewport.cols, g.viewport.rows, 3);
  });
  sink.add("iterations", [&] {
    if (g.max_iter > 65535) throw SchemaError("invalid_value", "max_iter", "iterations image needs max_iter <= 65535");
    return io::encode_pgm(g.iterations, g.viewport.cols, g.viewport.rows, g.max_iter);
  });
}

void run_bsd(const json& p, int threads, Sink& sink, json& summary) {
  const arith::CurveD curve{inum(p, "d")};
  const auto kind = str(p, "count") == "affine" ? arith::Count::Affine : arith::Count::Projective;
  const auto series = arith::product_series(curve, inum(p, "x_max"), kind, threads);
  summary["primes"] = series.primes.size();
  summary["bad_primes_skipped"] = series.bad_primes_skipped;
  summary["final_log_product"] = series.log_products.empty() ? json(nullptr) : json(series.log_products.back());
  try {
    const auto fit = arith::rank_slope(series, inum(p, "p_min"));
    summary["fit"] = {{"slope", fit.slope},
                      {"intercept", fit.intercept},
                      {"residual", fit.residual},
                      {"p_min_used", fit.p_min_used},
                      {"points", fit.points}};
  } catch (const std::invalid_argument& e) {
    summary["fit"] = nullptr;
    summary["fit_skipped"] = e.what();
  }
  sink.add("series", [&] {
    io::Column pc{"p", {}}, n{"N_p", {}}, l{"log_product", {}};
    for (std::size_t i = 0; i < series.primes.size(); ++i) {
      pc.values.push_back(static_cast<double>(series.primes[i]));
      n.values.push_back(static_cast<double>(series.counts[i]));
      l.values.push_back(series.log_products[i]);
    }
    return io::encode_csv({pc, n, l});
  });
}

}  // namespace

std::vector<OutputSpec> default_outputs(const std::string& experiment) {
  const auto it = output_table().find(experiment);
  if (it == output_table().end()) schema::find_experiment(experiment);
  return it->second;
}

RunResult execute(const std::string& experiment, const json& p, std::uint64_t seed, int threads,
                  const std::vector<OutputSpec>& requested) {
  const auto& table = default_outputs(experiment);
  std::vector<OutputSpec> wanted;
  if (requested.empty()) {
    for (const auto& o : table) {
      if (default_on(experiment, o.kind, p)) wanted.push_back(o);
    }
  } else {
    for (const auto& o : requested) {
      const auto it = std::find_if(table.begin(), table.end(), [&](const OutputSpec& t) { return t.kind == o.kind; });
      if (it == table.end()) {
        std::string kinds;
        for (const auto& t : table) kinds += (kinds.empty() ? "" : ", ") + t.kind;
        throw SchemaError("unknown_output", o.kind, "unknown output kind '" + o.kind + "' for " + experiment + "; valid: " + kinds);
      }
      wanted.push_back({o.kind, o.path.empty() ? it->path : o.path});
    }
  }
  std::set<std::string> paths;
  for (const auto& o : wanted) {
    const std::filesystem::path rel(o.path);
    if (rel.is_absolute() || rel.lexically_normal().string().rfind("..", 0) == 0) {
      throw SchemaError("invalid_output_path", o.kind, "output path must stay inside the output directory: " + o.path);
    }
    if (rel == kReportName || !paths.insert(rel.lexically_normal().string()).second) {
      throw SchemaError("invalid_output_path", o.kind, "output path collides with another file: " + o.path);
    }
  }

  Sink sink(wanted);
  RunResult result;
  json& s = result.summary;
  if (experiment == "lorenz") run_lorenz(p, sink, s);
  else if (experiment == "henon-heiles") run_henon_heiles(p, threads, sink, s);
  else if (experiment == "fput") run_fput(p, sink, s);
  else if (experiment == "kdv") run_kdv(p, threads, sink, s);
  else if (experiment == "turing") run_turing(p, seed, threads, sink, s);
  else if (experiment == "logistic") run_logistic(p, threads, sink, s);
  else if (experiment == "henon") run_henon(p, sink, s);
  else if (experiment == "julia") run_julia(p, threads, sink, s);
  else if (experiment == "mandelbrot") run_mandelbrot(p, threads, sink, s);
  else if (experiment == "newton") run_newton(p, threads, sink, s);
  else if (experiment == "bsd") run_bsd(p, threads, sink, s);
  else schema::find_experiment(experiment);
  result.files = sink.take();
  return result;
}

json run_manifest(const Manifest& m, const RunOptions& opts) {
  const auto& sch = schema::find_experiment(m.experiment);
  const json params = schema::resolve(sch, m.params, schema::Mode::Batch);
  const RunResult result = execute(m.experiment, params, m.seed, opts.threads, m.outputs);

  json outputs = json::array();
  for (const auto& f : result.files) {
    const auto path = opts.out_dir / f.path;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(f.bytes.data(), static_cast<std::streamsize>(f.bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
    outputs.push_back({{"kind", f.kind}, {"path", f.path}, {"bytes", f.bytes.size()}, {"sha256", io::sha256_hex(f.bytes)}});
  }
  json report{{"experiment", m.experiment},
              {"seed", m.seed},
              {"params", params},
              {"versions", {{"lab", version()}, {"report_format", 1}, {"palettes", io::palette_names()}}},
              {"outputs", outputs},
              {"summary", result.summary}};
  std::filesystem::create_directories(opts.out_dir);
  std::ofstream rep(opts.out_dir / kReportName, std::ios::binary | std::ios::trunc);
  rep << report.dump(2) << '\n';
  if (!rep) throw std::runtime_error("cannot write the run report");
  return report;
}

}  // namespace lab::run
