#include "swarmneat/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace swarmneat {

using nlohmann::json;
namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void SenseSpec::validate() const {
  if (k < 1) throw std::invalid_argument("sense k must be >= 1");
  if (!(range > 0.0)) throw std::invalid_argument("sense range must be positive");
}

void to_json(json& j, const SenseSpec& s) {
  j = json{{"k", s.k},
           {"mode", s.mode == SenseMode::Distance ? "distance" : "neighbor"},
           {"range", s.range},
           {"frame", s.frame == SenseFrame::World ? "world" : "body"},
           {"include_walls", s.include_walls},
           {"include_proximity", s.include_proximity},
           {"proximity_range", s.proximity_range},
           {"inversion", s.inversion == Inversion::Reciprocal ? "reciprocal" : "linear"}};
}

void from_json(const json& j, SenseSpec& s) {
  s.k = j.value("k", s.k);
  if (j.contains("mode")) {
    const std::string m = j.at("mode");
    if (m == "distance") s.mode = SenseMode::Distance;
    else if (m == "neighbor") s.mode = SenseMode::Neighbor;
    else throw std::invalid_argument("unknown sense mode '" + m + "'");
  }
  s.range = j.value("range", s.range);
  if (j.contains("frame")) {
    const std::string f = j.at("frame");
    if (f == "world") s.frame = SenseFrame::World;
    else if (f == "body") s.frame = SenseFrame::Body;
    else throw std::invalid_argument("unknown sense frame '" + f + "'");
  }
  s.include_walls = j.value("include_walls", s.include_walls);
  s.include_proximity = j.value("include_proximity", s.include_proximity);
  s.proximity_range = j.value("proximity_range", s.proximity_range);
  if (j.contains("inversion")) {
    const std::string inv = j.at("inversion");
    if (inv == "reciprocal") s.inversion = Inversion::Reciprocal;
    else if (inv == "linear") s.inversion = Inversion::Linear;
    else throw std::invalid_argument("unknown inversion '" + inv + "'");
  }
  s.validate();
}

int ktant_index(double bearing, int k) {
  if (k < 1) throw std::invalid_argument("ktant_index: k must be >= 1");
  const double width = kTwoPi / k;
  double b = std::fmod(bearing, kTwoPi);
  if (b < 0.0) b += kTwoPi;
  const int idx = static_cast<int>(std::floor((b + 0.5 * width) / width));
  return idx % k;
}

double ktant_center(int region, int k) { return region * kTwoPi / k; }

double invert_distance(double d, Inversion inv, double range) {
  if (inv == Inversion::Linear) return std::max(0.0, 1.0 - d / range);
  return 1.0 / (1.0 + d);
}

namespace {

double reference_heading(const AgentState& self, SenseFrame frame) {
  return frame == SenseFrame::Body ? self.heading : 0.0;
}

template <typename Visit>
void for_each_in_range(const AgentState& self, std::span<const AgentState> others,
                       const SenseSpec& spec, Visit visit) {
  const double ref = reference_heading(self, spec.frame);
  for (const auto& o : others) {
    if (&o == &self) continue;
    const double dx = o.x - self.x, dy = o.y - self.y;
    const double d = std::hypot(dx, dy);
    if (d > spec.range) continue;
    const double bearing = d > 0.0 ? std::atan2(dy, dx) - ref : 0.0;
    visit(ktant_index(bearing, spec.k), d);
  }
}

}  // namespace

std::vector<double> distance_sense(const AgentState& self, std::span<const AgentState> others,
                                   const SenseSpec& spec) {
  std::vector<double> nearest(static_cast<std::size_t>(spec.k),
                              std::numeric_limits<double>::infinity());
  for_each_in_range(self, others, spec, [&](int region, double d) {
    auto& n = nearest[static_cast<std::size_t>(region)];
    n = std::min(n, d);
  });
  std::vector<double> out(nearest.size(), 0.0);
  for (std::size_t i = 0; i < nearest.size(); ++i)
    if (std::isfinite(nearest[i])) out[i] = invert_distance(nearest[i], spec.inversion, spec.range);
  return out;
}

std::vector<double> neighbor_sense(const AgentState& self, std::span<const AgentState> others,
                                   const SenseSpec& spec) {
  std::vector<double> counts(static_cast<std::size_t>(spec.k), 0.0);
  for_each_in_range(self, others, spec,
                    [&](int region, double) { counts[static_cast<std::size_t>(region)] += 1.0; });
  return counts;
}

static double ray_to_boundary(double x, double y, double cx, double cy, const ArenaSpec& arena,
                              double altitude) {
  constexpr double eps = 1e-12;
  double best = std::numeric_limits<double>::infinity();
  const Rect& b = arena.bounds;
  if (cx > eps) best = std::min(best, (b.x_max - x) / cx);
  if (cx < -eps) best = std::min(best, (b.x_min - x) / cx);
  if (cy > eps) best = std::min(best, (b.y_max - y) / cy);
  if (cy < -eps) best = std::min(best, (b.y_min - y) / cy);
  if (arena.wall && altitude <= arena.wall->height) {
    const double face = 0.5 * arena.wall->thickness;
    if (x >= face && cx < -eps) best = std::min(best, (face - x) / cx);
    else if (x <= -face && cx > eps) best = std::min(best, (-face - x) / cx);
    else if (x > -face && x < face) best = 0.0;
  }
  return std::max(0.0, best);
}

std::vector<double> wall_sense(const AgentState& self, const ArenaSpec& arena, int k,
                               SenseFrame frame, Inversion inv, double range) {
  if (k < 1) throw std::invalid_argument("wall_sense: k must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(k));
  const double ref = reference_heading(self, frame);
  for (int i = 0; i < k; ++i) {
    const double bearing = ref + ktant_center(i, k);
    const double d = ray_to_boundary(self.x, self.y, std::cos(bearing), std::sin(bearing), arena,
                                     self.altitude);
    out[static_cast<std::size_t>(i)] = invert_distance(d, inv, range);
  }
  return out;
}

double proximity_sense(const AgentState& self, std::span<const AgentState> others, double max_ray,
                       double body_radius, Inversion inv) {
  const double hx = std::cos(self.heading), hy = std::sin(self.heading);
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& o : others) {
    if (&o == &self) continue;
    const double dx = o.x - self.x, dy = o.y - self.y;
    const double along = dx * hx + dy * hy;
    if (along <= 0.0 || along > max_ray) continue;
    const double lateral = std::abs(-dx * hy + dy * hx);
    // Corridor half-width r meets a body of radius r.
    if (lateral > 2.0 * body_radius) continue;
    nearest = std::min(nearest, along);
  }
  return std::isfinite(nearest) ? invert_distance(nearest, inv, max_ray) : 0.0;
}

Observation observe(const WorldState& world, std::size_t index, const SenseSpec& spec,
                    const SimParams& params) {
  const AgentState& self = world.agents.at(index);
  const std::span<const AgentState> all(world.agents);
  Observation obs = spec.mode == SenseMode::Distance ? distance_sense(self, all, spec)
                                                     : neighbor_sense(self, all, spec);
  obs.reserve(spec.input_arity());
  if (spec.include_walls) {
    const auto walls = wall_sense(self, world.arena, spec.k, spec.frame, spec.inversion, spec.range);
    obs.insert(obs.end(), walls.begin(), walls.end());
  }
  if (spec.include_proximity)
    obs.push_back(proximity_sense(self, all, spec.proximity_range, params.body_radius, spec.inversion));
  return obs;
}

}  // namespace swarmneat
