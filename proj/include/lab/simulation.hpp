#pragma once

// Steppable state machines behind live sessions. Each experiment advances in
// unit steps, accumulates frame data between drains, and accepts hot
// parameter changes between steps.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace lab::live {

using nlohmann::json;

enum class FrameKind { TrajectoryBatch, FieldSnapshot, EscapeTile, SeriesAppend };

std::string_view to_string(FrameKind kind);

/// {"packing": "f32le", "shape": [rows, cols], "data": base64}; row-major.
json pack(std::span<const double> values, std::size_t rows, std::size_t cols);

class Simulation {
 public:
  virtual ~Simulation() = default;

  virtual FrameKind kind() const = 0;

  /// One step. False when there is nothing left to compute.
  virtual bool advance() = 0;

  /// Frame payload for the steps since the previous drain; empty if none.
  virtual std::optional<json> drain() = 0;

  /// Full state, sent when a subscriber cannot be caught up from the replay buffer.
  virtual json keyframe() const = 0;

  /// Takes the merged parameter set and the patch that produced it. Validates
  /// first; on any exception the simulation is unchanged.
  virtual void apply(const json& params, const json& patch) = 0;

  /// Escape grids restart their render on every applied patch and emit one
  /// frame per tile.
  virtual bool rerenders() const { return false; }
};

/// `params` must already be resolved against the schema in session mode.
std::unique_ptr<Simulation> make_simulation(const std::string& experiment, const json& params, std::uint64_t seed);

}  // namespace lab::live
