#pragma once

// Parameter schemas for every experiment. The CLI and the session server both
// validate against this registry, and it is the single place where a key is
// marked hot (mutable in a live session) or cold (needs a restart).

#include <nlohmann/json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lab::schema {

using nlohmann::json;

enum class Type { Real, Integer, Boolean, String };

std::string_view to_string(Type t);

struct ParamSpec {
  std::string key;
  Type type = Type::Real;
  bool required = false;
  json fallback;  // default when not required
  std::optional<double> min;
  std::optional<double> max;
  bool min_exclusive = false;
  std::vector<std::string> choices;  // String params only; empty means free text
  bool hot = false;
  bool batch_only = false;  // run length of a batch job; sessions step indefinitely
  std::string help;
};

struct ExperimentSchema {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;

  const ParamSpec* find(std::string_view key) const;
  std::vector<std::string> required_keys() const;
};

/// Structured validation failure; `code` is machine-readable.
class SchemaError : public std::invalid_argument {
 public:
  SchemaError(std::string code, std::string field, const std::string& message);
  const std::string& code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }
  json to_json() const;

 private:
  std::string code_;
  std::string field_;
};

const std::vector<ExperimentSchema>& registry();

/// Throws SchemaError("unknown_experiment") listing the valid names.
const ExperimentSchema& find_experiment(std::string_view name);
std::vector<std::string> experiment_names();

enum class Mode {
  Batch,    // every required key must be present
  Session,  // batch_only keys are optional
};

/// Checks types, ranges and unknown keys and fills defaults. The result holds
/// every non-batch key of the schema plus any batch key that was given.
json resolve(const ExperimentSchema& schema, const json& given, Mode mode = Mode::Batch);

/// Validates a partial update for a live session. Throws SchemaError with code
/// "restart_required" naming the first cold key, or a validation code if a
/// value is out of range. Returns the merged parameter set.
json apply_patch(const ExperimentSchema& schema, const json& current, const json& patch);

/// Parses "key=value" as given on the command line, typed by the schema.
std::pair<std::string, json> parse_assignment(const ExperimentSchema& schema, std::string_view assignment);

/// Registry as JSON, for clients that build controls from it.
json describe(const ExperimentSchema& schema);
json describe_all();

}  // namespace lab::schema
