#include "lab/schema.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "lab/io.hpp"

namespace lab::schema {

std::string_view to_string(Type t) {
  switch (t) {
    case Type::Real: return "real";
    case Type::Integer: return "integer";
    case Type::Boolean: return "boolean";
    case Type::String: return "string";
  }
  return "unknown";
}

const ParamSpec* ExperimentSchema::find(std::string_view key) const {
  for (const auto& p : params) {
    if (p.key == key) return &p;
  }
  return nullptr;
}

std::vector<std::string> ExperimentSchema::required_keys() const {
  std::vector<std::string> out;
  for (const auto& p : params) {
    if (p.required) out.push_back(p.key);
  }
  return out;
}

SchemaError::SchemaError(std::string code, std::string field, const std::string& message)
    : std::invalid_argument(message), code_(std::move(code)), field_(std::move(field)) {}

json SchemaError::to_json() const {
  json j{{"error", code_}, {"message", what()}};
  if (!field_.empty()) j["field"] = field_;
  return j;
}

namespace {

// Builder for the registry tables below.
struct P {
  ParamSpec s;

  P(std::string key, Type t, std::string help) {
    s.key = std::move(key);
    s.type = t;
    s.help = std::move(help);
  }
  P& def(json v) {
    s.fallback = std::move(v);
    return *this;
  }
  P& required() {
    s.required = true;
    return *this;
  }
  P& batch() {
    s.batch_only = true;
    return *this;
  }
  P& hot() {
    s.hot = true;
    return *this;
  }
  P& range(std::optional<double> lo, std::optional<double> hi) {
    s.min = lo;
    s.max = hi;
    return *this;
  }
  P& positive(std::optional<double> hi = std::nullopt) {
    s.min = 0.0;
    s.min_exclusive = true;
    s.max = hi;
    return *this;
  }
  P& choices(std::vector<std::string> c) {
    s.choices = std::move(c);
    return *this;
  }
  operator ParamSpec() const { return s; }
};

P real(std::string k, std::string help) { return P(std::move(k), Type::Real, std::move(help)); }
P integer(std::string k, std::string help) { return P(std::move(k), Type::Integer, std::move(help)); }
P boolean(std::string k, std::string help) { return P(std::move(k), Type::Boolean, std::move(help)); }
P text(std::string k, std::string help) { return P(std::move(k), Type::String, std::move(help)); }

std::vector<ParamSpec> viewport_params(double cx, double cy, double width) {
  return {
      real("center_re", "viewport centre, real part").def(cx).hot(),
      real("center_im", "viewport centre, imaginary part").def(cy).hot(),
      real("width", "viewport width in the complex plane").def(width).positive().hot(),
      integer("cols", "image width in pixels").required().range(1, 16384),
      integer("rows", "image height in pixels").required().range(1, 16384),
      integer("tile_size", "render tile edge in pixels").def(64).range(1, 16384),
  };
}

std::vector<ExperimentSchema> build_registry() {
  std::vector<ExperimentSchema> r;

  r.push_back({"lorenz",
               "Lorenz convection model: attractor samples and twin-orbit separation",
               {
                   real("sigma", "Prandtl number").def(10.0).hot(),
                   real("r", "reduced Rayleigh number").def(28.0).range(0.0, std::nullopt).hot(),
                   real("b", "geometric factor").def(8.0 / 3.0).positive().hot(),
                   real("dt", "RK4 step").def(0.01).positive(0.05).hot(),
                   real("x0", "initial x").def(1.0),
                   real("y0", "initial y").def(1.0),
                   real("z0", "initial z").def(1.0),
                   integer("transient", "steps discarded before sampling").def(1000).range(0, 1e8),
                   integer("steps", "steps sampled after the transient").required().batch().range(0, 1e8),
                   integer("record_every", "keep every n-th step").def(1).range(1, 1e8),
                   real("delta0", "x offset of a twin orbit; 0 disables the separation output").def(0.0).range(0.0, 1.0),
               }});

  r.push_back({"henon-heiles",
               "Henon-Heiles Poincare section on x = 0, px > 0",
               {
                   real("energy", "orbit energy, at most 1/6").required().positive(1.0 / 6.0).hot(),
                   integer("crossings", "section points per seed").required().batch().range(0, 1e6),
                   integer("seeds", "number of seed orbits").def(9).range(1, 10000),
                   real("dt", "RK4 step").def(0.01).positive(0.1),
                   text("seed_rule", "seed placement on the section").def("grid").choices({"grid", "y-line", "py-line"}),
                   real("escape_radius", "distance at which an orbit counts as escaped").def(10.0).positive(),
               }});

  r.push_back({"fput",
               "Fermi-Pasta-Ulam-Tsingou chain: normal-mode energies",
               {
                   integer("n_masses", "number of springs N (N - 1 moving masses)").def(32).range(2, 4096),
                   real("alpha", "quadratic nonlinearity").def(0.25).hot(),
                   real("dt", "leapfrog step").def(0.05).positive(1.0),
                   integer("mode", "initially excited mode").def(1).range(1, 4095),
                   real("amplitude", "initial mode amplitude").def(1.0),
                   real("t_end", "run length").required().batch().range(0.0, 1e7),
                   real("record_dt", "sampling interval").def(1.0).positive(),
                   real("max_drift", "abort when relative energy drift exceeds this").def(1e-4).positive(),
               }});

  r.push_back({"kdv",
               "Korteweg-de Vries equation, Zabusky-Kruskal scheme, periodic domain",
               {
                   real("delta", "dispersion coefficient").def(0.022).range(0.0, std::nullopt).hot(),
                   integer("n_points", "grid points").def(256).range(5, 1 << 20),
                   real("dt", "time step").def(1e-4).positive(),
                   real("length", "domain length").def(2.0).positive(),
                   text("init", "initial profile").def("cosine").choices({"cosine", "two-soliton"}),
                   real("t_end", "run length").required().batch().range(0.0, 1e4),
                   real("record_dt", "sampling interval").def(0.1).positive(),
                   real("min_height", "pulse detection threshold").def(1.0).positive(),
               }});

  r.push_back({"turing",
               "Activator-inhibitor reaction-diffusion on a periodic grid",
               {
                   real("A", "activator diffusion").def(0.1).range(0.0, std::nullopt).hot(),
                   real("B", "inhibitor diffusion").def(4.0).range(0.0, std::nullopt).hot(),
                   real("dt", "forward-Euler step").def(0.02).positive(),
                   real("dx", "grid spacing").def(1.0).positive(),
                   integer("nx", "grid columns").def(64).range(8, 4096),
                   integer("ny", "grid rows").def(64).range(8, 4096),
                   text("coupling", "field diffused in the inhibitor equation").def("inhibitor").choices({"inhibitor", "verbatim"}),
                   real("noise", "amplitude of the uniform noise added to u").def(0.01).range(0.0, std::nullopt),
                   integer("steps", "number of steps").required().batch().range(0, 1e8),
                   integer("record_every", "statistics cadence in steps").def(100).range(1, 1e8),
                   integer("perturb_x", "column of a one-off bump added to u").def(0).range(0, 4095).hot(),
                   integer("perturb_y", "row of a one-off bump added to u").def(0).range(0, 4095).hot(),
                   real("perturb_amp", "height of the bump; 0 for none").def(0.0).hot(),
               }});

  r.push_back({"logistic",
               "Logistic map: bifurcation diagram and period-doubling cascade",
               {
                   real("r_min", "left edge of the r window").def(2.4).positive(4.0).hot(),
                   real("r_max", "right edge of the r window").def(4.0).positive(4.0).hot(),
                   integer("n_r", "number of r columns").required().range(2, 100000).hot(),
                   integer("transient", "iterates discarded per column").def(1000).range(0, 1e7),
                   integer("samples", "iterates kept per column").def(100).range(1, 10000),
                   real("x0", "starting point").def(0.5).range(0.0, 1.0),
                   real("r", "parameter of the live orbit").def(3.5).positive(4.0).hot(),
                   integer("cascade", "superstable parameters to locate; 0 skips").def(0).range(0, 14),
               }});

  r.push_back({"henon",
               "Henon map orbit and fixed points",
               {
                   real("a", "quadratic coefficient").def(1.4).hot(),
                   real("b", "contraction").def(0.3).hot(),
                   real("x0", "initial x").def(0.0),
                   real("y0", "initial y").def(0.0),
                   integer("transient", "iterates discarded").def(100).range(0, 1e8),
                   integer("iterations", "iterates recorded").required().batch().range(0, 1e8),
               }});

  {
    ExperimentSchema j{"julia", "Filled Julia set of z^2 + c by escape time", {}};
    j.params = {
        real("c_re", "parameter c, real part").required().hot(),
        real("c_im", "parameter c, imaginary part").required().hot(),
    };
    for (auto& p : viewport_params(0.0, 0.0, 3.0)) j.params.push_back(p);
    j.params.push_back(integer("max_iter", "iteration limit").required().range(1, 1e6).hot());
    j.params.push_back(real("bailout", "escape radius").def(2.0).range(2.0, std::nullopt).hot());
    j.params.push_back(boolean("smooth", "fractional iteration counts").def(false));
    j.params.push_back(text("palette", "colour palette").def("ember-v1").choices(io::palette_names()).hot());
    r.push_back(std::move(j));
  }
  {
    ExperimentSchema m{"mandelbrot", "Mandelbrot set by escape time", {}};
    m.params = viewport_params(-0.5, 0.0, 3.0);
    m.params.push_back(integer("max_iter", "iteration limit").required().range(1, 1e6).hot());
    m.params.push_back(real("bailout", "escape radius").def(2.0).range(2.0, std::nullopt).hot());
    m.params.push_back(boolean("smooth", "fractional iteration counts").def(false));
    m.params.push_back(boolean("interior_check", "skip the cardioid and period-2 bulb").def(false).hot());
    m.params.push_back(text("palette", "colour palette").def("ember-v1").choices(io::palette_names()).hot());
    r.push_back(std::move(m));
  }
  {
    ExperimentSchema n{"newton", "Newton basins of z^3 - 1", {}};
    n.params = viewport_params(0.0, 0.0, 4.0);
    n.params.push_back(integer("max_iter", "iteration limit").def(64).range(1, 1e6).hot());
    n.params.push_back(real("tol", "distance to a root that counts as converged").def(1e-9).positive().hot());
    r.push_back(std::move(n));
  }

  r.push_back({"bsd",
               "Point counts on y^2 = x^3 - d x and the cumulative product over primes",
               {
                   integer("d", "curve parameter").required().range(1, 1e12),
                   integer("x_max", "largest prime considered").required().range(3, 1e8),
                   integer("p_min", "smallest prime in the slope fit").def(100).range(2, 1e8),
                   text("count", "point-count convention").def("affine").choices({"affine", "projective"}),
               }});
  return r;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
  return out;
}

json check_value(const ParamSpec& spec, const json& v) {
  auto fail = [&](const std::string& why) -> SchemaError {
    return SchemaError("invalid_value", spec.key, spec.key + ": " + why);
  };
  json out;
  switch (spec.type) {
    case Type::Real:
      if (!v.is_number()) throw fail("expected a number");
      out = v.get<double>();
      if (!std::isfinite(out.get<double>())) throw fail("must be finite");
      break;
    case Type::Integer: {
      if (v.is_number_integer()) {
        out = v.get<std::int64_t>();
      } else if (v.is_number_float() && std::nearbyint(v.get<double>()) == v.get<double>() &&
                 std::abs(v.get<double>()) < 9.0e15) {
        out = static_cast<std::int64_t>(v.get<double>());
      } else {
        throw fail("expected an integer");
      }
      break;
    }
    case Type::Boolean:
      if (!v.is_boolean()) throw fail("expected true or false");
      out = v;
      break;
    case Type::String:
      if (!v.is_string()) throw fail("expected a string");
      out = v;
      if (!spec.choices.empty() &&
          std::find(spec.choices.begin(), spec.choices.end(), v.get<std::string>()) == spec.choices.end()) {
        throw fail("must be one of " + join(spec.choices));
      }
      break;
  }
  if (spec.type == Type::Real || spec.type == Type::Integer) {
    const double x = out.get<double>();
    if (spec.min) {
      const bool bad = spec.min_exclusive ? !(x > *spec.min) : !(x >= *spec.min);
      if (bad) throw fail(std::string("must be ") + (spec.min_exclusive ? "> " : ">= ") + io::format_double(*spec.min));
    }
    if (spec.max && !(x <= *spec.max)) throw fail("must be <= " + io::format_double(*spec.max));
  }
  return out;
}

}  // namespace

const std::vector<ExperimentSchema>& registry() {
  static const std::vector<ExperimentSchema> r = build_registry();
  return r;
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& e : registry()) out.push_back(e.name);
  return out;
}

const ExperimentSchema& find_experiment(std::string_view name) {
  for (const auto& e : registry()) {
    if (e.name == name) return e;
  }
  throw SchemaError("unknown_experiment", "experiment",
                    "unknown experiment '" + std::string(name) + "'; valid: " + join(experiment_names()));
}

json resolve(const ExperimentSchema& schema, const json& given, Mode mode) {
  if (!given.is_object()) throw SchemaError("invalid_params", "params", "params must be a JSON object");
  for (const auto& [key, value] : given.items()) {
    if (!schema.find(key)) {
      throw SchemaError("unknown_param", key, "unknown parameter '" + key + "' for " + schema.name);
    }
  }
  json out = json::object();
  for (const auto& spec : schema.params) {
    const auto it = given.find(spec.key);
    if (it != given.end()) {
      out[spec.key] = check_value(spec, *it);
    } else if (spec.required && !(spec.batch_only && mode == Mode::Session)) {
      throw SchemaError("missing_param", spec.key, "missing required parameter '" + spec.key + "' for " + schema.name);
    } else if (!spec.required) {
      out[spec.key] = spec.fallback;
    }
  }
  return out;
}

json apply_patch(const ExperimentSchema& schema, const json& current, const json& patch) {
  if (!patch.is_object() || patch.empty()) throw SchemaError("invalid_params", "params", "patch must be a non-empty object");
  json merged = current;
  for (const auto& [key, value] : patch.items()) {
    const ParamSpec* spec = schema.find(key);
    if (!spec) throw SchemaError("unknown_param", key, "unknown parameter '" + key + "' for " + schema.name);
    if (!spec->hot) {
      throw SchemaError("restart_required", key, "'" + key + "' is fixed for the life of a session; create a new one");
    }
    merged[key] = check_value(*spec, value);
  }
  return merged;
}

std::pair<std::string, json> parse_assignment(const ExperimentSchema& schema, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw SchemaError("invalid_assignment", std::string(assignment), "expected key=value, got '" + std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string_view text = assignment.substr(eq + 1);
  const ParamSpec* spec = schema.find(key);
  if (!spec) throw SchemaError("unknown_param", key, "unknown parameter '" + key + "' for " + schema.name);
  auto bad = [&] { return SchemaError("invalid_value", key, key + ": cannot parse '" + std::string(text) + "' as " + std::string(to_string(spec->type))); };
  switch (spec->type) {
    case Type::String: return {key, std::string(text)};
    case Type::Boolean:
      if (text == "true" || text == "1") return {key, true};
      if (text == "false" || text == "0") return {key, false};
      throw bad();
    case Type::Integer: {
      std::int64_t v = 0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec == std::errc{} && res.ptr == text.data() + text.size()) return {key, v};
      double d = 0.0;
      const auto rd = std::from_chars(text.data(), text.data() + text.size(), d);
      if (rd.ec == std::errc{} && rd.ptr == text.data() + text.size()) return {key, d};
      throw bad();
    }
    case Type::Real: {
      double d = 0.0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), d);
      if (res.ec == std::errc{} && res.ptr == text.data() + text.size()) return {key, d};
      throw bad();
    }
  }
  throw bad();
}

json describe(const ExperimentSchema& schema) {
  json params = json::array();
  for (const auto& p : schema.params) {
    json j{{"key", p.key}, {"type", to_string(p.type)}, {"required", p.required}, {"hot", p.hot}, {"help", p.help}};
    if (!p.required) j["default"] = p.fallback;
    if (p.batch_only) j["batch_only"] = true;
    if (p.min) j[p.min_exclusive ? "min_exclusive" : "min"] = *p.min;
    if (p.max) j["max"] = *p.max;
    if (!p.choices.empty()) j["choices"] = p.choices;
    params.push_back(std::move(j));
  }
  return {{"name", schema.name}, {"summary", schema.summary}, {"params", std::move(params)}};
}

json describe_all() {
  json out = json::array();
  for (const auto& e : registry()) out.push_back(describe(e));
  return out;
}

}  // namespace lab::schema
