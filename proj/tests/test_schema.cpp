#include "doctest.h"

#include <algorithm>
#include <set>

#include "lab/schema.hpp"

using namespace lab::schema;

TEST_CASE("registry covers the experiment set") {
  const auto list = experiment_names();
  const std::set<std::string> names(list.begin(), list.end());
  CHECK(names == std::set<std::string>{"bsd", "fput", "henon", "henon-heiles", "julia", "kdv", "logistic", "lorenz",
                                       "mandelbrot", "newton", "turing"});
  for (const auto& e : registry()) {
    std::set<std::string> keys;
    for (const auto& p : e.params) {
      CHECK_MESSAGE(keys.insert(p.key).second, e.name << " repeats " << p.key);
      CHECK_FALSE(p.help.empty());
      if (p.required) continue;
      CAPTURE(p.key);
      if (p.min && p.fallback.is_number()) CHECK(p.fallback.get<double>() >= *p.min);
      if (p.max && p.fallback.is_number()) CHECK(p.fallback.get<double>() <= *p.max);
      if (!p.choices.empty()) CHECK(std::find(p.choices.begin(), p.choices.end(), p.fallback) != p.choices.end());
    }
  }
}

TEST_CASE("unknown experiment names the valid identifiers") {
  try {
    find_experiment("lorentz");
    FAIL("no throw");
  } catch (const SchemaError& e) {
    CHECK(e.code() == "unknown_experiment");
    for (const auto& n : experiment_names()) CHECK(std::string(e.what()).find(n) != std::string::npos);
  }
}

TEST_CASE("missing required parameter names the field") {
  const auto& s = find_experiment("mandelbrot");
  try {
    resolve(s, {{"cols", 4}, {"rows", 4}});
    FAIL("no throw");
  } catch (const SchemaError& e) {
    CHECK(e.code() == "missing_param");
    CHECK(e.field() == "max_iter");
    const auto j = e.to_json();
    CHECK(j["error"] == "missing_param");
    CHECK(j["field"] == "max_iter");
  }
}

TEST_CASE("defaults are filled and types enforced") {
  const auto& s = find_experiment("lorenz");
  const auto p = resolve(s, {{"steps", 10}});
  CHECK(p["sigma"] == 10.0);
  CHECK(p["steps"] == 10);
  CHECK_THROWS_AS(resolve(s, {{"steps", 1.5}}), SchemaError);
  CHECK_THROWS_AS(resolve(s, {{"steps", "10"}}), SchemaError);
  CHECK_THROWS_AS(resolve(s, {{"steps", 10}, {"sigmaa", 1}}), SchemaError);
  CHECK_THROWS_AS(resolve(s, {{"steps", 10}, {"dt", 0.0}}), SchemaError);
}

TEST_CASE("session mode waives batch-only keys") {
  const auto& s = find_experiment("lorenz");
  CHECK_THROWS_AS(resolve(s, json::object(), Mode::Batch), SchemaError);
  const auto p = resolve(s, json::object(), Mode::Session);
  CHECK_FALSE(p.contains("steps"));
}

TEST_CASE("choices are enforced") {
  const auto& s = find_experiment("kdv");
  CHECK_NOTHROW(resolve(s, {{"t_end", 1.0}, {"init", "two-soliton"}}));
  CHECK_THROWS_AS(resolve(s, {{"t_end", 1.0}, {"init", "gaussian"}}), SchemaError);
}

TEST_CASE("patches: hot keys merge, cold keys need a restart, bad values change nothing") {
  const auto& s = find_experiment("lorenz");
  const auto cur = resolve(s, json::object(), Mode::Session);
  const auto merged = apply_patch(s, cur, {{"r", 99.0}});
  CHECK(merged["r"] == 99.0);
  CHECK(cur["r"] == 28.0);
  try {
    apply_patch(s, cur, {{"x0", 1.0}});
    FAIL("no throw");
  } catch (const SchemaError& e) {
    CHECK(e.code() == "restart_required");
    CHECK(e.field() == "x0");
  }
  CHECK_THROWS_AS(apply_patch(s, cur, {{"dt", -1.0}}), SchemaError);
  CHECK_THROWS_AS(apply_patch(s, cur, json::object()), SchemaError);
}

TEST_CASE("command-line assignments are typed") {
  const auto& s = find_experiment("mandelbrot");
  CHECK(parse_assignment(s, "max_iter=100").second == 100);
  CHECK(parse_assignment(s, "center_re=-0.5").second == -0.5);
  CHECK(parse_assignment(s, "palette=grey-v1").second == "grey-v1");
  CHECK(parse_assignment(s, "smooth=true").second == true);
  CHECK_THROWS_AS(parse_assignment(s, "max_iter"), SchemaError);
  CHECK_THROWS_AS(parse_assignment(s, "=3"), SchemaError);
  CHECK_THROWS_AS(parse_assignment(s, "smooth=maybe"), SchemaError);
  CHECK_THROWS_AS(parse_assignment(s, "nope=1"), SchemaError);
}

TEST_CASE("describe lists required keys") {
  const auto all = describe_all();
  REQUIRE(all.is_array());
  CHECK(all.size() == registry().size());
  for (const auto& e : all) {
    const auto& s = find_experiment(e["name"].get<std::string>());
    for (const auto& k : s.required_keys()) {
      bool found = false;
      for (const auto& p : e["params"]) found |= p["key"] == k && p["required"] == true;
      CHECK_MESSAGE(found, s.name << " " << k);
    }
  }
}
