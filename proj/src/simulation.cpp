#include "lab/simulation.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lab/arith.hpp"
#include "lab/flows.hpp"
#include "lab/fractal.hpp"
#include "lab/io.hpp"
#include "lab/lattice.hpp"
#include "lab/maps.hpp"
#include "lab/schema.hpp"
#include "lab/turing.hpp"

namespace lab::live {

std::string_view to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::TrajectoryBatch: return "trajectory-batch";
    case FrameKind::FieldSnapshot: return "field-snapshot";
    case FrameKind::EscapeTile: return "escape-tile";
    case FrameKind::SeriesAppend: return "series-append";
  }
  return "unknown";
}

json pack(std::span<const double> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) throw std::logic_error("pack: shape does not match the data");
  return {{"packing", "f32le"}, {"shape", {rows, cols}}, {"data", io::base64_encode(io::pack_f32_le(values))}};
}

namespace {

double num(const json& p, const char* key) { return p.at(key).get<double>(); }
std::size_t size(const json& p, const char* key) { return static_cast<std::size_t>(p.at(key).get<std::int64_t>()); }

json pack_ints(std::span<const int> values, std::size_t rows, std::size_t cols) {
  std::vector<double> d(values.begin(), values.end());
  return pack(d, rows, cols);
}

class LorenzSim final : public Simulation {
 public:
  explicit LorenzSim(const json& p)
      : params_(read(p)), dt_(num(p, "dt")), every_(size(p, "record_every")), state_{num(p, "x0"), num(p, "y0"), num(p, "z0")} {}

  FrameKind kind() const override { return FrameKind::TrajectoryBatch; }

  bool advance() override {
    const auto f = [this](const State& s) { return flows::lorenz_field(params_, s); };
    state_ = rk4_step(f, state_, dt_);
    t_ += dt_;
    ++steps_;
    ++pending_steps_;
    if (steps_ % every_ == 0) {
      points_.insert(points_.end(), state_.begin(), state_.end());
      times_.push_back(t_);
    }
    return true;
  }

  std::optional<json> drain() override {
    if (pending_steps_ == 0) return std::nullopt;
    json out{{"steps", pending_steps_}, {"points", pack(points_, times_.size(), 3)}, {"t", pack(times_, times_.size(), 1)}};
    points_.clear();
    times_.clear();
    pending_steps_ = 0;
    return out;
  }

  json keyframe() const override { return {{"state", state_}, {"t", t_}}; }

  void apply(const json& p, const json&) override {
    params_ = read(p);
    dt_ = num(p, "dt");
  }

 private:
  static flows::LorenzParams read(const json& p) { return {num(p, "sigma"), num(p, "r"), num(p, "b")}; }

  flows::LorenzParams params_;
  double dt_;
  std::size_t every_;
  State state_;
  double t_ = 0.0;
  std::size_t steps_ = 0, pending_steps_ = 0;
  std::vector<double> points_, times_;
};

// All seeds advance in lockstep; crossings of x = 0 with px > 0 are appended.
class HenonHeilesSim final : public Simulation {
 public:
  explicit HenonHeilesSim(const json& p)
      : n_seeds_(size(p, "seeds")), rule_(*flows::parse_seed_rule(p.at("seed_rule").get<std::string>())),
        dt_(num(p, "dt")), radius_(num(p, "escape_radius")) {
    reseed(num(p, "energy"));
  }

  FrameKind kind() const override { return FrameKind::SeriesAppend; }

  bool advance() override {
    const SectionSpec section{0, 0.0, Direction::Up};
    for (auto& o : orbits_) {
      if (o.escaped) continue;
      State next = rk4_step(flows::hh_field, o.state, dt_);
      if (auto c = segment_crossing(0.0, o.state, dt_, next, section); c && c->state[2] > 0.0) {
        points_.insert(points_.end(), {static_cast<double>(o.index), c->state[1], c->state[3]});
      }
      o.escaped = std::abs(next[0]) > radius_ || std::abs(next[1]) > radius_;
      o.state = std::move(next);
    }
    ++pending_steps_;
    return true;
  }

  std::optional<json> drain() override {
    if (pending_steps_ == 0) return std::nullopt;
    json out{{"steps", pending_steps_}, {"energy", energy_}, {"columns", {"seed", "y", "py"}},
             {"points", pack(points_, points_.size() / 3, 3)}};
    points_.clear();
    pending_steps_ = 0;
    return out;
  }

  json keyframe() const override {
    json orbits = json::array();
    for (const auto& o : orbits_) orbits.push_back({{"seed", o.index}, {"state", o.state}, {"escaped", o.escaped}});
    return {{"energy", energy_}, {"orbits", orbits}};
  }

  void apply(const json& p, const json& patch) override {
    dt_ = num(p, "dt");
    if (patch.contains("energy")) reseed(num(p, "energy"));
  }

 private:
  struct Orbit {
    std::size_t index;
    State state;
    bool escaped = false;
  };

  void reseed(double energy) {
    std::vector<Orbit> fresh;
    const auto candidates = flows::hh_seed_candidates(energy, n_seeds_, rule_);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (auto s = flows::hh_seed(energy, candidates[i].first, candidates[i].second)) fresh.push_back({i, s->to_state()});
    }
    orbits_ = std::move(fresh);
    energy_ = energy;
  }

  std::size_t n_seeds_;
  flows::SeedRule rule_;
  double dt_, radius_, energy_ = 0.0;
  std::vector<Orbit> orbits_;
  std::vector<double> points_;
  std::size_t pending_steps_ = 0;
};

class FputSim final : public Simulation {
 public:
  explicit FputSim(const json& p) : chain_(read(p), size(p, "mode"), num(p, "amplitude")) {}

  FrameKind kind() const override { return FrameKind::FieldSnapshot; }

  bool advance() override {
    chain_.step();
    ++pending_steps_;
    return true;
  }

  std::optional<json> drain() override {
    if (pending_steps_ == 0) return std::nullopt;
    pending_steps_ = 0;
    const auto& u = chain_.displacements();
    if (!std::isfinite(chain_.energy())) throw StepFailure(0, chain_.steps(), "fput: energy is not finite");
    const auto e = lattice::mode_energies(u, chain_.velocities(), chain_.params().n_masses);
    return json{{"t", chain_.time()}, {"energy", chain_.energy()}, {"u", pack(u, 1, u.size())}, {"modes", pack(e, 1, e.size())}};
  }

  json keyframe() const override {
    return {{"t", chain_.time()}, {"u", chain_.displacements()}, {"v", chain_.velocities()}};
  }

  void apply(const json& p, const json&) override { chain_.set_alpha(num(p, "alpha")); }

 private:
  static lattice::FputParams read(const json& p) {
    lattice::FputParams fp;
    fp.n_masses = size(p, "n_masses");
    fp.alpha = num(p, "alpha");
    fp.dt = num(p, "dt");
    return fp;
  }

  lattice::FputChain chain_;
  std::size_t pending_steps_ = 0;
};

std::vector<double> kdv_init(const json& p, const lattice::KdvParams& kp) {
  const std::size_t n = kp.points();
  if (p.at("init") == "cosine") return lattice::cosine_profile(n, kp.length);
  auto v = lattice::soliton_profile(n, kp.length, kp.delta, 0.6, 0.2 * kp.length);
  const auto slow = lattice::soliton_profile(n, kp.length, kp.delta, 0.2, 0.5 * kp.length);
  for (std::size_t i = 0; i < n; ++i) v[i] += slow[i];
  return v;
}

class KdvSim final : public Simulation {
 public:
  explicit KdvSim(const json& p) : solver_(make(p), kdv_init(p, make(p)), 1) {}

  FrameKind kind() const override { return FrameKind::FieldSnapshot; }

  bool advance() override {
    solver_.step();
    ++pending_steps_;
    return true;
  }

  std::optional<json> drain() override {
    if (pending_steps_ == 0) return std::nullopt;
    pending_steps_ = 0;
    const auto& v = solver_.field();
    return json{{"t", solver_.time()}, {"dx", solver_.params().dx}, {"v", pack(v, 1, v.size())}};
  }

  json keyframe() const override { return {{"t", solver_.time()}, {"v", solver_.field()}}; }

  void apply(const json& p, const json&) override { solver_.set_delta(num(p, "delta")); }

 private:
  static lattice::KdvParams make(const json& p) {
    return lattice::KdvParams::make(num(p, "delta"), size(p, "n_points"), num(p, "dt"), num(p, "length"));
  }

  lattice::KdvSolver solver_;
  std::size_t pending_steps_ = 0;
};

class TuringSim final : public Simulation {
 public:
  TuringSim(const json& p, std::uint64_t seed) : params_(read(p)) {
    params_.validate();
    std::tie(u_, v_) = turing::initial_state(params_, seed, num(p, "noise"));
    perturb(p);
  }

  FrameKind kind() const override { return FrameKind::FieldSnapshot; }

  bool advance() override {
    std::tie(u_, v_) = turing::turing_step(u_, v_, params_, 1);
    ++steps_;
    ++pending_steps_;
    return true;
  }

  std::optional<json> drain() override {
    if (pending_steps_ == 0) return std::nullopt;
    pending_steps_ = 0;
    const auto st = turing::pattern_stats(u_);
    return json{{"step", steps_},
                {"stats_u", {{"mean", st.mean}, {"std", st.std}, {"min", st.min}, {"max", st.max}}},
                {"u", pack(u_.values, u_.ny, u_.nx)},
                {"v", pack(v_.values, v_.ny, v_.nx)}};
  }

  json keyframe() const override { return {{"step", steps_}, {"u", pack(u_.values, u_.ny, u_.nx)}, {"v", pack(v_.values, v_.ny, v_.nx)}}; }

  void apply(const json& p, const json& patch) override {
    auto next = params_;
    next.A = num(p, "A");
    next.B = num(p, "B");
    next.validate();
    if (patch.contains("perturb_x") || patch.contains("perturb_y") || patch.contains("perturb_amp")) check_bump(p);
    params_ = next;
    perturb(p, patch);
  }

 private:
  static turing::TuringParams read(const json& p) {
    turing::TuringParams tp;
    tp.A = num(p, "A");
    tp.B = num(p, "B");
    tp.dt = num(p, "dt");
    tp.dx = num(p, "dx");
    tp.nx = size(p, "nx");
    tp.ny = size(p, "ny");
    tp.coupling = *turing::parse_coupling(p.at("coupling").get<std::string>());
    return tp;
  }

  void check_bump(const json& p) const {
    if (size(p, "perturb_x") >= params_.nx) throw schema::SchemaError("invalid_value", "perturb_x", "perturb_x lies outside the grid");
    if (size(p, "perturb_y") >= params_.ny) throw schema::SchemaError("invalid_value", "perturb_y", "perturb_y lies outside the grid");
  }

  // A bump is a one-off event: applied at creation and whenever a patch names perturb_amp.
  void perturb(const json& p, const json& patch = json::object({{"perturb_amp", 0}})) {
    if (!patch.contains("perturb_amp") || num(p, "perturb_amp") == 0.0) return;
    check_bump(p);
    u_.at(size(p, "perturb_y"), size(p, "perturb_x")) += num(p, "perturb_amp");
  }

  turing::TuringParams params_;
  turing::Field2D u_, v_;
  std::size_t steps_ = 0, pending_steps_ = 0;
};

class LogisticSim final : public Simulation {
 public:
  explicit LogisticSim(const json& p) : r_(num(p, "r")), x_(num(p, "x0")) {}

  FrameKind kind() const override { return FrameKind::SeriesAppend; }

  bool advance() override {
    x_ = maps::logistic(r_, x_);
    xs_.push_back(x_);
    return true;
  }

  std::optional<json> drain() override {
    if (xs_.empty()) return std::nullopt;
    json out{{"r", r_}, {"x", pack(xs_, xs_.size(), 1)}};
    xs_.clear();
    return out;
  }

  json keyframe() const override { return {{"r", r_}, {"x", x_}}; }

  void apply(const json& p, const json&) override { r_ = num(p, "r"); }

 private:
  double r_, x_;
  std::vector<double> xs_;
};

class HenonSim final : public Simulation {
 public:
  explicit HenonSim(const json& p) : params_{num(p, "a"), num(p, "b")}, pt_{num(p, "x0"), num(p, "y0")} {}

  FrameKind kind() const override { return FrameKind::SeriesAppend; }

  bool advance() override {
    pt_ = maps::henon(params_, pt_);
    ++steps_;
    if (!(std::abs(pt_.x) <= maps::kHenonEscape && std::abs(pt_.y) <= maps::kHenonEscape)) throw maps::HenonEscape(steps_);
    points_.insert(points_.end(), {pt_.x, pt_.y});
    return true;
  }

  std::optional<json> drain() override {
    if (points_.empty()) return std::nullopt;
    json out{{"points", pack(points_, points_.size() / 2, 2)}};
    points_.clear();
    return out;
  }

  json keyframe() const override { return {{"point", {pt_.x, pt_.y}}}; }

  void apply(const json& p, const json&) override { params_ = {num(p, "a"), num(p, "b")}; }

 private:
  maps::HenonParams params_;
  maps::Point2 pt_;
  std::size_t steps_ = 0;
  std::vector<double> points_;
};

// One step renders one tile of the current epoch's image.
class EscapeSim final : public Simulation {
 public:
  EscapeSim(std::string experiment, const json& p) : experiment_(std::move(experiment)) { restart(p); }

  FrameKind kind() const override { return FrameKind::EscapeTile; }
  bool rerenders() const override { return true; }

  bool advance() override {
    if (next_ == tiles_.size()) return false;
    fractal::render_tile(job_, tiles_[next_], grid_);
    pending_ = next_++;
    return true;
  }

  std::optional<json> drain() override {
    if (!pending_) return std::nullopt;
    const std::size_t index = *pending_;
    const auto& t = tiles_[index];
    pending_.reset();
    json out{{"tile", {{"index", index}, {"of", tiles_.size()}, {"row0", t.row0}, {"col0", t.col0}, {"rows", t.rows},
                       {"cols", t.cols}}}};
    const std::size_t width = fractal::job_viewport(job_).cols;
    auto cut = [&](auto const& src) {
      std::vector<double> v;
      v.reserve(t.rows * t.cols);
      for (std::size_t r = 0; r < t.rows; ++r) {
        for (std::size_t c = 0; c < t.cols; ++c) v.push_back(static_cast<double>(src[(t.row0 + r) * width + t.col0 + c]));
      }
      return pack(v, t.rows, t.cols);
    };
    if (const auto* g = std::get_if<fractal::EscapeGrid>(&grid_)) {
      out["max_iter"] = g->max_iter;
      out["counts"] = cut(g->counts);
      if (!g->smooth.empty()) out["smooth"] = cut(g->smooth);
    } else {
      const auto& b = std::get<fractal::BasinGrid>(grid_);
      out["max_iter"] = b.max_iter;
      out["labels"] = cut(b.labels);
      out["iterations"] = cut(b.iterations);
    }
    return out;
  }

  json keyframe() const override {
    const auto& vp = fractal::job_viewport(job_);
    json out{{"tiles_done", next_}, {"tiles", tiles_.size()}, {"tile_size", tile_size_}};
    if (const auto* g = std::get_if<fractal::EscapeGrid>(&grid_)) {
      out["counts"] = pack_ints(g->counts, vp.rows, vp.cols);
    } else {
      const auto& b = std::get<fractal::BasinGrid>(grid_);
      out["labels"] = pack_ints(b.labels, vp.rows, vp.cols);
      out["iterations"] = pack_ints(b.iterations, vp.rows, vp.cols);
    }
    return out;
  }

  void apply(const json& p, const json&) override { restart(p); }

 private:
  void restart(const json& p) {
    const fractal::Viewport vp{{num(p, "center_re"), num(p, "center_im")}, num(p, "width"), size(p, "cols"), size(p, "rows")};
    vp.validate();
    const int max_iter = static_cast<int>(p.at("max_iter").get<std::int64_t>());
    fractal::RenderJob job;
    if (experiment_ == "newton") {
      job = fractal::NewtonJob{vp, max_iter, num(p, "tol")};
    } else {
      const bool smooth = p.at("smooth").get<bool>();
      const double bailout = smooth ? std::max(num(p, "bailout"), fractal::kSmoothBailout) : num(p, "bailout");
      if (experiment_ == "julia") {
        job = fractal::JuliaJob{{num(p, "c_re"), num(p, "c_im")}, vp, max_iter, bailout, smooth};
      } else {
        job = fractal::MandelbrotJob{vp, max_iter, bailout, smooth, p.at("interior_check").get<bool>()};
      }
    }
    tile_size_ = size(p, "tile_size");
    auto tiles = fractal::tile_rects(vp, tile_size_);
    grid_ = fractal::allocate_grid(job);
    job_ = std::move(job);
    tiles_ = std::move(tiles);
    next_ = 0;
    pending_.reset();
  }

  std::string experiment_;
  fractal::RenderJob job_;
  fractal::RenderGrid grid_;
  std::vector<fractal::TileRect> tiles_;
  std::size_t tile_size_ = 64, next_ = 0;
  std::optional<std::size_t> pending_;
};

class BsdSim final : public Simulation {
 public:
  explicit BsdSim(const json& p) : curve_{p.at("d").get<std::int64_t>()}, projective_(p.at("count") == "projective") {
    curve_.validate();
    primes_ = arith::primes_upto(p.at("x_max").get<std::int64_t>());
  }

  FrameKind kind() const override { return FrameKind::SeriesAppend; }

  bool advance() override {
    if (next_ == primes_.size()) return false;
    const auto p = primes_[next_++];
    if ((2 * curve_.d) % p == 0) {
      ++pending_steps_;
      return true;
    }
    const auto n = arith::count_points_mod_p(curve_, p, projective_ ? arith::Count::Projective : arith::Count::Affine);
    if (n == 0) throw std::runtime_error("N_p = 0 at p = " + std::to_string(p));
    log_product_ += std::log(static_cast<double>(n) / static_cast<double>(p));
    rows_.insert(rows_.end(), {static_cast<double>(p), static_cast<double>(n), log_product_});
    ++pending_steps_;
    return true;
  }

  std::optional<json> drain() override {
    if (pending_steps_ == 0) return std::nullopt;
    pending_steps_ = 0;
    json out{{"columns", {"p", "N_p", "log_product"}}, {"rows", pack(rows_, rows_.size() / 3, 3)}};
    rows_.clear();
    return out;
  }

  json keyframe() const override {
    return {{"primes_done", next_}, {"primes", primes_.size()}, {"log_product", log_product_}};
  }

  void apply(const json&, const json&) override {}

 private:
  arith::CurveD curve_;
  bool projective_;
  std::vector<std::int64_t> primes_;
  std::size_t next_ = 0, pending_steps_ = 0;
  double log_product_ = 0.0;
  std::vector<double> rows_;
};

}  // namespace

std::unique_ptr<Simulation> make_simulation(const std::string& experiment, const json& p, std::uint64_t seed) {
  if (experiment == "lorenz") return std::make_unique<LorenzSim>(p);
  if (experiment == "henon-heiles") return std::make_unique<HenonHeilesSim>(p);
  if (experiment == "fput") return std::make_unique<FputSim>(p);
  if (experiment == "kdv") return std::make_unique<KdvSim>(p);
  if (experiment == "turing") return std::make_unique<TuringSim>(p, seed);
  if (experiment == "logistic") return std::make_unique<LogisticSim>(p);
  if (experiment == "henon") return std::make_unique<HenonSim>(p);
  if (experiment == "julia" || experiment == "mandelbrot" || experiment == "newton") {
    return std::make_unique<EscapeSim>(experiment, p);
  }
  if (experiment == "bsd") return std::make_unique<BsdSim>(p);
  schema::find_experiment(experiment);
  throw std::logic_error("no live simulation for " + experiment);
}

}  // namespace lab::live
