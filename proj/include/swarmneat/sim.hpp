#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "swarmneat/rng.hpp"

namespace swarmneat {

enum class ActuationMode { Blimp, Drive };

std::string to_string(ActuationMode m);
ActuationMode parse_actuation(const std::string& s);

struct Rect {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

// A wall along x = 0 spanning the full arena height. Agents at or below
// `height` cannot cross it.
struct InteriorWall {
  double height = 3.0;
  double thickness = 0.1;
};

struct ArenaSpec {
  Rect bounds;
  std::optional<InteriorWall> wall;

  void validate() const;
};

struct SimParams {
  double dt = 0.05;
  // Blimp velocity controller.
  double v_max = 0.5;
  // Differential drive.
  double w_max = 0.2;
  double wheelbase = 0.05;
  double body_radius = 0.05;
  // Altitude hold and stacking.
  double h_set = 1.2;
  double body_height = 0.5;
  double tau_alt = 1.0;
  double ultrasound_half_angle_deg = 5.0;
  // Horizontal radius of a blimp's top surface as seen by the downward
  // range sensor of an agent above it.
  double blimp_radius = 0.25;
  // Spawning.
  double min_sep = 0.5;
  int spawn_attempts = 10000;
};

void to_json(nlohmann::json& j, const SimParams& p);
void from_json(const nlohmann::json& j, SimParams& p);
void to_json(nlohmann::json& j, const ArenaSpec& a);
void from_json(const nlohmann::json& j, ArenaSpec& a);
void to_json(nlohmann::json& j, const Rect& r);
void from_json(const nlohmann::json& j, Rect& r);

// Blimp mode uses (vx, vy) in m/s; drive mode uses wheel speeds in m/s.
struct Command {
  double vx = 0.0, vy = 0.0;
  double w_left = 0.0, w_right = 0.0;

  static Command velocity(double vx, double vy) { return {vx, vy, 0.0, 0.0}; }
  static Command wheels(double left, double right) { return {0.0, 0.0, left, right}; }
  bool operator==(const Command&) const = default;
};

struct AgentState {
  double x = 0.0, y = 0.0;
  double heading = 0.0;   // drive mode
  double altitude = 0.0;  // blimp mode: height of the body's base
  double body_height = 0.0;
  Command last_command;   // as realized after clamping

  bool operator==(const AgentState&) const = default;
};

struct WorldState {
  ActuationMode mode = ActuationMode::Blimp;
  ArenaSpec arena;
  std::vector<AgentState> agents;
  std::int64_t steps = 0;
  double dt = 0.05;
  std::uint64_t seed = 0;

  double time() const { return static_cast<double>(steps) * dt; }
  bool operator==(const WorldState& o) const {
    return mode == o.mode && agents == o.agents && steps == o.steps && dt == o.dt && seed == o.seed;
  }
};

// Uniform rejection sampling with pairwise separation params.min_sep.
// Throws std::runtime_error when the region cannot hold n agents.
WorldState spawn(const ArenaSpec& arena, int n, const Rect& region, ActuationMode mode,
                 const SimParams& params, Rng& rng);

// Maps network outputs in (0, 1) to a command: c = (2o - 1) * c_max.
Command decode_command(std::span<const double> outputs, ActuationMode mode, const SimParams& params);

// Advances one tick of params.dt.
void step(WorldState& world, std::span<const Command> commands, const SimParams& params);

// Floor sensed by agent `i` through its downward range sensor: top of the
// highest agent below it inside the sensing cone, or 0 (ground).
double sensed_floor(const WorldState& world, std::size_t i, const SimParams& params);

// Relaxes every blimp's altitude toward sensed floor + h_set over `dt`.
void resolve_altitudes(WorldState& world, const SimParams& params, double dt);

}  // namespace swarmneat
