#pragma once

// Batch execution of one experiment: resolves parameters against the schema
// registry, runs the kernels, encodes outputs and writes a run report.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lab/schema.hpp"

namespace lab::run {

using nlohmann::json;

struct OutputSpec {
  std::string kind;
  std::string path;  // relative to the output directory
};

struct Manifest {
  std::string experiment;
  json params = json::object();
  std::vector<OutputSpec> outputs;  // empty: every default output
  std::uint64_t seed = 0;
};

/// Reads {"experiment", "params", "outputs", "seed"}; throws schema::SchemaError.
Manifest parse_manifest(const json& doc);

struct OutputFile {
  std::string kind;
  std::string path;
  std::string bytes;
};

struct RunResult {
  std::vector<OutputFile> files;
  json summary = json::object();
};

/// Output kinds an experiment can produce, with their default file names.
std::vector<OutputSpec> default_outputs(const std::string& experiment);

/// Runs with already-resolved parameters and encodes the requested outputs in memory.
RunResult execute(const std::string& experiment, const json& params, std::uint64_t seed, int threads,
                  const std::vector<OutputSpec>& outputs);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  int threads = 0;
};

inline constexpr const char* kReportName = "run_report.json";

/// Resolves, runs, writes every output plus run_report.json, returns the report.
/// The report holds only data that is a function of the manifest, so it is
/// byte-identical across repeated runs and thread counts.
json run_manifest(const Manifest& manifest, const RunOptions& opts);

std::string version();

}  // namespace lab::run
