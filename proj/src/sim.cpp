#include "swarmneat/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swarmneat {

using nlohmann::json;

std::string to_string(ActuationMode m) { return m == ActuationMode::Blimp ? "blimp" : "drive"; }

ActuationMode parse_actuation(const std::string& s) {
  if (s == "blimp") return ActuationMode::Blimp;
  if (s == "drive") return ActuationMode::Drive;
  throw std::invalid_argument("unknown actuation mode '" + s + "'");
}

void ArenaSpec::validate() const {
  if (!(bounds.x_min < bounds.x_max) || !(bounds.y_min < bounds.y_max))
    throw std::invalid_argument("arena bounds are empty");
  if (wall && !(wall->height > 0.0)) throw std::invalid_argument("wall height must be positive");
  if (wall && !(wall->thickness >= 0.0)) throw std::invalid_argument("wall thickness must be >= 0");
}

void to_json(json& j, const Rect& r) {
  j = json{{"x_min", r.x_min}, {"x_max", r.x_max}, {"y_min", r.y_min}, {"y_max", r.y_max}};
}

void from_json(const json& j, Rect& r) {
  r.x_min = j.value("x_min", r.x_min);
  r.x_max = j.value("x_max", r.x_max);
  r.y_min = j.value("y_min", r.y_min);
  r.y_max = j.value("y_max", r.y_max);
}

void to_json(json& j, const ArenaSpec& a) {
  j = json{{"bounds", a.bounds}};
  if (a.wall)
    j["wall"] = json{{"height", a.wall->height}, {"thickness", a.wall->thickness}};
  else
    j["wall"] = nullptr;
}

void from_json(const json& j, ArenaSpec& a) {
  if (j.contains("bounds")) j.at("bounds").get_to(a.bounds);
  if (j.contains("wall")) {
    if (j.at("wall").is_null()) {
      a.wall.reset();
    } else {
      InteriorWall w = a.wall.value_or(InteriorWall{});
      w.height = j.at("wall").value("height", w.height);
      w.thickness = j.at("wall").value("thickness", w.thickness);
      a.wall = w;
    }
  }
  a.validate();
}

void to_json(json& j, const SimParams& p) {
  j = json{{"dt", p.dt},
           {"v_max", p.v_max},
           {"w_max", p.w_max},
           {"wheelbase", p.wheelbase},
           {"body_radius", p.body_radius},
           {"h_set", p.h_set},
           {"body_height", p.body_height},
           {"tau_alt", p.tau_alt},
           {"ultrasound_half_angle_deg", p.ultrasound_half_angle_deg},
           {"blimp_radius", p.blimp_radius},
           {"min_sep", p.min_sep},
           {"spawn_attempts", p.spawn_attempts}};
}

void from_json(const json& j, SimParams& p) {
  p.dt = j.value("dt", p.dt);
  p.v_max = j.value("v_max", p.v_max);
  p.w_max = j.value("w_max", p.w_max);
  p.wheelbase = j.value("wheelbase", p.wheelbase);
  p.body_radius = j.value("body_radius", p.body_radius);
  p.h_set = j.value("h_set", p.h_set);
  p.body_height = j.value("body_height", p.body_height);
  p.tau_alt = j.value("tau_alt", p.tau_alt);
  p.ultrasound_half_angle_deg = j.value("ultrasound_half_angle_deg", p.ultrasound_half_angle_deg);
  p.blimp_radius = j.value("blimp_radius", p.blimp_radius);
  p.min_sep = j.value("min_sep", p.min_sep);
  p.spawn_attempts = j.value("spawn_attempts", p.spawn_attempts);
  if (!(p.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(p.tau_alt > 0.0)) throw std::invalid_argument("tau_alt must be positive");
  if (!(p.wheelbase > 0.0)) throw std::invalid_argument("wheelbase must be positive");
}

WorldState spawn(const ArenaSpec& arena, int n, const Rect& region, ActuationMode mode,
                 const SimParams& params, Rng& rng) {
  arena.validate();
  if (n < 1) throw std::invalid_argument("spawn: need at least one agent");
  if (!(region.x_min <= region.x_max && region.y_min <= region.y_max) ||
      !arena.bounds.contains(region.x_min, region.y_min) ||
      !arena.bounds.contains(region.x_max, region.y_max))
    throw std::invalid_argument("spawn region must lie inside the arena");

  WorldState w;
  w.mode = mode;
  w.arena = arena;
  w.dt = params.dt;
  const double sep2 = params.min_sep * params.min_sep;
  for (int i = 0; i < n; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < params.spawn_attempts && !placed; ++attempt) {
      const double x = rng.uniform(region.x_min, region.x_max);
      const double y = rng.uniform(region.y_min, region.y_max);
      const bool clear = std::all_of(w.agents.begin(), w.agents.end(), [&](const AgentState& a) {
        return (a.x - x) * (a.x - x) + (a.y - y) * (a.y - y) >= sep2;
      });
      if (!clear) continue;
      AgentState a;
      a.x = x;
      a.y = y;
      a.body_height = params.body_height;
      a.altitude = mode == ActuationMode::Blimp ? params.h_set : 0.0;
      w.agents.push_back(a);
      placed = true;
    }
    if (!placed)
      throw std::runtime_error("spawn: could not place agent " + std::to_string(i) + " of " +
                               std::to_string(n) + " at min_sep " +
                               std::to_string(params.min_sep));
  }
  for (auto& a : w.agents) a.heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return w;
}

Command decode_command(std::span<const double> outputs, ActuationMode mode, const SimParams& params) {
  if (outputs.size() != 2)
    throw std::invalid_argument("decode_command expects 2 outputs, got " +
                                std::to_string(outputs.size()));
  const double c_max = mode == ActuationMode::Blimp ? params.v_max : params.w_max;
  const double a = (2.0 * outputs[0] - 1.0) * c_max;
  const double b = (2.0 * outputs[1] - 1.0) * c_max;
  return mode == ActuationMode::Blimp ? Command::velocity(a, b) : Command::wheels(a, b);
}

namespace {

// Keeps agents at or below the wall top on their side of the slab
// |x| <= thickness / 2. Returns true when the x motion was stopped.
bool block_at_wall(const ArenaSpec& arena, double altitude, double old_x, double& x) {
  if (!arena.wall || altitude > arena.wall->height) return false;
  const double face = 0.5 * arena.wall->thickness;
  if (old_x >= face && x < face) {
    x = face;
    return true;
  }
  if (old_x <= -face && x > -face) {
    x = -face;
    return true;
  }
  if (old_x > -face && old_x < face) {
    // Came down onto the wall top: pushed off to the nearer face.
    x = old_x >= 0.0 ? face : -face;
    return true;
  }
  return false;
}

// Clamps to the arena; returns per-axis flags for a zeroed velocity.
std::pair<bool, bool> clamp_to_arena(const Rect& b, double& x, double& y) {
  const double cx = std::clamp(x, b.x_min, b.x_max);
  const double cy = std::clamp(y, b.y_min, b.y_max);
  const std::pair<bool, bool> hit{cx != x, cy != y};
  x = cx;
  y = cy;
  return hit;
}

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * std::numbers::pi);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

void separate_drive_agents(WorldState& world, const SimParams& params) {
  const double contact = 2.0 * params.body_radius;
  auto& agents = world.agents;
  std::vector<double> before;
  for (const auto& a : agents) before.push_back(a.x);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      const double dx = agents[j].x - agents[i].x;
      const double dy = agents[j].y - agents[i].y;
      const double d = std::hypot(dx, dy);
      if (d >= contact) continue;
      double ax = 1.0, ay = 0.0;
      if (d > 1e-12) {
        ax = dx / d;
        ay = dy / d;
      }
      const double half = 0.5 * (contact - d);
      agents[i].x -= ax * half;
      agents[i].y -= ay * half;
      agents[j].x += ax * half;
      agents[j].y += ay * half;
    }
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    AgentState& a = agents[i];
    clamp_to_arena(world.arena.bounds, a.x, a.y);
    double x = a.x;
    if (block_at_wall(world.arena, a.altitude, before[i], x)) a.x = x;
  }
}

}  // namespace

void step(WorldState& world, std::span<const Command> commands, const SimParams& params) {
  if (commands.size() != world.agents.size())
    throw std::invalid_argument("step: one command per agent required");
  if (!(params.dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const double dt = params.dt;
  world.dt = dt;

  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    AgentState& a = world.agents[i];
    const Command& cmd = commands[i];
    const double old_x = a.x;
    if (world.mode == ActuationMode::Blimp) {
      double vx = cmd.vx, vy = cmd.vy;
      const double speed = std::hypot(vx, vy);
      if (speed > params.v_max) {
        vx *= params.v_max / speed;
        vy *= params.v_max / speed;
      }
      double x = a.x + vx * dt;
      double y = a.y + vy * dt;
      if (block_at_wall(world.arena, a.altitude, old_x, x)) vx = 0.0;
      const auto [hit_x, hit_y] = clamp_to_arena(world.arena.bounds, x, y);
      if (hit_x) vx = 0.0;
      if (hit_y) vy = 0.0;
      a.x = x;
      a.y = y;
      a.last_command = Command::velocity(vx, vy);
    } else {
      const double wl = std::clamp(cmd.w_left, -params.w_max, params.w_max);
      const double wr = std::clamp(cmd.w_right, -params.w_max, params.w_max);
      const double v = 0.5 * (wl + wr);
      const double omega = (wr - wl) / params.wheelbase;
      if (omega != 0.0) a.heading = wrap_angle(a.heading + omega * dt);
      double x = a.x + v * dt * std::cos(a.heading);
      double y = a.y + v * dt * std::sin(a.heading);
      block_at_wall(world.arena, a.altitude, old_x, x);
      clamp_to_arena(world.arena.bounds, x, y);
      a.x = x;
      a.y = y;
      a.last_command = Command::wheels(wl, wr);
    }
  }

  if (world.mode == ActuationMode::Drive)
    separate_drive_agents(world, params);
  else
    resolve_altitudes(world, params, dt);
  ++world.steps;
}

static bool supports(const AgentState& below, std::size_t below_index, const AgentState& above,
                     std::size_t above_index, double cone_slope, const SimParams& params) {
  if (below.altitude > above.altitude) return false;
  if (below.altitude == above.altitude && below_index > above_index) return false;
  const double gap = std::max(0.0, above.altitude - (below.altitude + below.body_height));
  const double r = std::hypot(above.x - below.x, above.y - below.y);
  return r <= params.blimp_radius + cone_slope * gap;
}

double sensed_floor(const WorldState& world, std::size_t i, const SimParams& params) {
  const double slope = std::tan(params.ultrasound_half_angle_deg * std::numbers::pi / 180.0);
  const AgentState& self = world.agents[i];
  double floor = 0.0;
  for (std::size_t j = 0; j < world.agents.size(); ++j) {
    if (j == i) continue;
    const AgentState& other = world.agents[j];
    if (supports(other, j, self, i, slope, params))
      floor = std::max(floor, other.altitude + other.body_height);
  }
  return floor;
}

void resolve_altitudes(WorldState& world, const SimParams& params, double dt) {
  if (world.mode != ActuationMode::Blimp) return;
  std::vector<double> floors(world.agents.size());
  for (std::size_t i = 0; i < world.agents.size(); ++i) floors[i] = sensed_floor(world, i, params);
  const double gain = std::min(1.0, dt / params.tau_alt);
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    AgentState& a = world.agents[i];
    const double target = floors[i] + params.h_set;
    a.altitude += (target - a.altitude) * gain;
    a.altitude = std::max({a.altitude, floors[i], 0.0});
  }
}

}  // namespace swarmneat
