#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "swarmneat/sim.hpp"

namespace swarmneat {

enum class SenseMode { Distance, Neighbor };
enum class SenseFrame { World, Body };
enum class Inversion { Reciprocal, Linear };

struct SenseSpec {
  int k = 8;
  SenseMode mode = SenseMode::Distance;
  double range = 8.0;
  SenseFrame frame = SenseFrame::World;
  bool include_walls = false;
  bool include_proximity = false;
  double proximity_range = 1.0;
  Inversion inversion = Inversion::Reciprocal;

  void validate() const;
  std::size_t input_arity() const {
    return static_cast<std::size_t>(k) * (include_walls ? 2 : 1) + (include_proximity ? 1 : 0);
  }
};

void to_json(nlohmann::json& j, const SenseSpec& s);
void from_json(const nlohmann::json& j, SenseSpec& s);

using Observation = std::vector<double>;

// Region i covers bearings [(i - 0.5) * 2pi/k, (i + 0.5) * 2pi/k) after
// normalizing to [0, 2pi); region 0 is centred on the reference direction.
int ktant_index(double bearing, int k);
double ktant_center(int region, int k);

// Inverted distance: 1/(1+d) (Reciprocal) or max(0, 1 - d/range) (Linear).
double invert_distance(double d, Inversion inv, double range);

// In the functions below `others` may contain `self`; it is skipped by
// address. Bearings are planar; altitude plays no part.
std::vector<double> distance_sense(const AgentState& self, std::span<const AgentState> others,
                                   const SenseSpec& spec);
std::vector<double> neighbor_sense(const AgentState& self, std::span<const AgentState> others,
                                   const SenseSpec& spec);

// Ray along each region's centre bearing to the nearest arena boundary or,
// for agents not above it, the interior wall.
std::vector<double> wall_sense(const AgentState& self, const ArenaSpec& arena, int k,
                               SenseFrame frame = SenseFrame::World,
                               Inversion inv = Inversion::Reciprocal, double range = 8.0);

// Forward ray of width 2 * body_radius along the heading.
double proximity_sense(const AgentState& self, std::span<const AgentState> others, double max_ray,
                       double body_radius, Inversion inv = Inversion::Reciprocal);

Observation observe(const WorldState& world, std::size_t index, const SenseSpec& spec,
                    const SimParams& params);

}  // namespace swarmneat
