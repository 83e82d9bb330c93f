// lab: batch runner for the experiment registry.
//
//   lab <experiment> [--manifest FILE] [--set key=value]... [--out-dir DIR]
//       [--threads N] [--seed S]
//
// Exit status: 0 on success, 2 for bad input (error JSON on stderr),
// 1 when the numerics fail.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lab/runner.hpp"
#include "lab/schema.hpp"

using nlohmann::json;
namespace schema = lab::schema;

namespace {

std::string experiment_listing() {
  std::ostringstream out;
  out << "Experiments (required params):\n";
  for (const auto& e : schema::registry()) {
    out << "  " << e.name;
    const auto req = e.required_keys();
    out << std::string(e.name.size() < 14 ? 14 - e.name.size() : 1, ' ');
    if (req.empty()) out << "-";
    for (std::size_t i = 0; i < req.size(); ++i) out << (i ? ", " : "") << req[i];
    out << "\n      " << e.summary << '\n';
  }
  out << "\nUse --describe with an experiment for the full parameter table.\n"
         "LAB_THREADS sets the default thread count.";
  return out.str();
}

int fail(int status, const json& body) {
  std::cerr << body.dump() << '\n';
  return status;
}

int fail(int status, const std::string& code, const std::string& message, const std::string& field = {}) {
  json body{{"error", code}, {"message", message}};
  if (!field.empty()) body["field"] = field;
  return fail(status, body);
}

int threads_from_env() {
  const char* env = std::getenv("LAB_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0 || v > 4096) {
    throw schema::SchemaError("invalid_value", "LAB_THREADS", "LAB_THREADS must be a non-negative integer");
  }
  return static_cast<int>(v);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw schema::SchemaError("invalid_manifest", "manifest", "cannot open manifest " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw schema::SchemaError("invalid_manifest", "manifest", path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run one experiment and write its outputs plus run_report.json.", "lab"};
  app.footer(experiment_listing());

  std::string experiment, manifest_path, out_dir = ".";
  std::vector<std::string> sets;
  int threads = -1;
  std::uint64_t seed = 0;
  bool describe = false;
  app.add_option("experiment", experiment, "Experiment name; may be omitted when the manifest names it");
  app.add_option("--manifest", manifest_path, "JSON manifest: {experiment, params, outputs, seed}")->check(CLI::ExistingFile);
  app.add_option("--set", sets, "Override one parameter, key=value (repeatable)");
  app.add_option("--out-dir", out_dir, "Directory for outputs and the run report");
  app.add_option("--threads", threads, "Worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Random seed for stochastic initial data");
  app.add_flag("--describe", describe, "Print the parameter schema as JSON and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "usage", e.what());
  }

  try {
    if (describe) {
      std::cout << (experiment.empty() ? schema::describe_all() : schema::describe(schema::find_experiment(experiment))).dump(2)
                << '\n';
      return 0;
    }

    lab::run::Manifest manifest;
    if (!manifest_path.empty()) {
      manifest = lab::run::parse_manifest(read_json_file(manifest_path));
      if (!experiment.empty() && experiment != manifest.experiment) {
        return fail(2, "experiment_mismatch",
                    "command line names '" + experiment + "' but the manifest names '" + manifest.experiment + "'",
                    "experiment");
      }
    } else if (experiment.empty()) {
      return fail(2, "missing_param", "no experiment given; valid: " + [] {
        std::string s;
        for (const auto& n : schema::experiment_names()) s += (s.empty() ? "" : ", ") + n;
        return s;
      }(), "experiment");
    } else {
      manifest.experiment = experiment;
    }

    const auto& sch = schema::find_experiment(manifest.experiment);
    for (const auto& s : sets) {
      auto [key, value] = schema::parse_assignment(sch, s);
      manifest.params[key] = value;
    }
    if (*seed_opt) manifest.seed = seed;

    lab::run::RunOptions opts;
    opts.out_dir = out_dir;
    opts.threads = threads >= 0 ? threads : threads_from_env();
    const json report = lab::run::run_manifest(manifest, opts);
    std::cout << report.dump(2) << '\n';
    return 0;
  } catch (const schema::SchemaError& e) {
    return fail(2, e.to_json());
  } catch (const std::invalid_argument& e) {
    return fail(2, "invalid_params", e.what());
  } catch (const std::exception& e) {
    return fail(1, "run_failed", e.what());
  }
}
