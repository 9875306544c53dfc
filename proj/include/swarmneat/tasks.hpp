#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmneat/network.hpp"
#include "swarmneat/sensing.hpp"
#include "swarmneat/sim.hpp"

namespace swarmneat {

enum class FitnessKind { DeploymentEntropy, WallClimb };

struct FitnessSpec {
  FitnessKind kind = FitnessKind::DeploymentEntropy;
  int grid = 4;         // entropy: g x g cells over the arena
  double wall_x = 0.0;  // wall climb: plane of the interior wall
};

struct DesignedPolicyParams {
  double wall_bias_gain = 0.5;         // wall climb: weight of the pull toward the wall
  double wall_repulsion_weight = 0.5;  // area coverage: weight of wall values
  double turn_gain = 4.0;              // drive mode: rad/s per rad of heading error
  double wall_bias_x = -1.0;           // unit vector pointing toward the wall
  double wall_bias_y = 0.0;
};

struct TaskSpec {
  std::string name;
  ArenaSpec arena;
  int n_agents = 1;
  ActuationMode mode = ActuationMode::Blimp;
  SenseSpec sense;
  Rect spawn_region;
  double duration = 60.0;
  SimParams sim;
  FitnessSpec fitness;
  DesignedPolicyParams designed;
  // Trajectory decimation: one logged frame every `log_every` steps.
  int log_every = 10;

  std::size_t input_arity() const { return sense.input_arity(); }
  static constexpr std::size_t output_arity() { return 2; }
  std::int64_t step_count() const;
  void validate() const;
};

void to_json(nlohmann::json& j, const TaskSpec& t);
void from_json(const nlohmann::json& j, TaskSpec& t);

const std::vector<std::string>& task_names();

// Built-in tasks: gtmab_area, anki_area, wall_climb_distance,
// wall_climb_neighbor. `overrides` is merged into the task's JSON form.
TaskSpec make_task(const std::string& name, const nlohmann::json& overrides = nlohmann::json::object());

// Shannon entropy (natural log) of the agents' occupancy of a g x g grid
// over `bounds`. Cells are lower-edge inclusive; the upper arena edge falls in
// the last cell.
double deployment_entropy(std::span<const AgentState> agents, const Rect& bounds, int grid);

// Count of agents with x < wall_x, or minus the smallest |x - wall_x| when
// no agent crossed.
double wall_climb_fitness(std::span<const AgentState> agents, double wall_x);

double task_fitness(const TaskSpec& task, const WorldState& final_state);

// Moves away from sensed neighbours (and walls, weighted). Zero command when
// the repulsion cancels out.
Command designed_area_policy(const Observation& obs, const AgentState& self, const SenseSpec& sense,
                             ActuationMode mode, const SimParams& sim,
                             const DesignedPolicyParams& params);

// Heads for the region holding the nearest neighbour (distance sense) or the
// most neighbours (neighbour sense), plus a small bias toward the wall. The
// wall bias is a world-frame unit vector.
Command designed_wall_policy(const Observation& obs, const AgentState& self, const SenseSpec& sense,
                             ActuationMode mode, const SimParams& sim,
                             const DesignedPolicyParams& params);

// Converts a world-frame direction into a command: full speed along it for
// blimps, proportional turn-and-go for differential drive. A zero direction
// yields a zero command.
Command steer(double dx, double dy, const AgentState& self, ActuationMode mode, const SimParams& sim,
              double turn_gain);

// Per-agent controller. Every agent runs the same (immutable) instance.
class Policy {
public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual std::size_t input_arity() const = 0;
  virtual std::size_t output_arity() const = 0;
  virtual Command act(const Observation& obs, const AgentState& self) const = 0;
};

class NetworkPolicy final : public Policy {
public:
  NetworkPolicy(FeedForwardNetwork net, ActuationMode mode, SimParams sim, std::string name = "genome");
  std::string name() const override { return name_; }
  std::size_t input_arity() const override { return net_.num_inputs(); }
  std::size_t output_arity() const override { return net_.num_outputs(); }
  Command act(const Observation& obs, const AgentState& self) const override;

private:
  FeedForwardNetwork net_;
  ActuationMode mode_;
  SimParams sim_;
  std::string name_;
};

class DesignedPolicy final : public Policy {
public:
  explicit DesignedPolicy(const TaskSpec& task);
  std::string name() const override;
  std::size_t input_arity() const override { return task_.input_arity(); }
  std::size_t output_arity() const override { return TaskSpec::output_arity(); }
  Command act(const Observation& obs, const AgentState& self) const override;

private:
  TaskSpec task_;
};

struct TrajectoryRow {
  double time;
  int agent;
  double x, y, altitude, heading;
};

struct EpisodeResult {
  double fitness = 0.0;
  WorldState final_state;
  std::vector<TrajectoryRow> trajectory;
};

class ArityError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Throws ArityError before simulating when the policy does not fit the task.
void check_arity(const TaskSpec& task, const Policy& policy);

EpisodeResult run_episode(const TaskSpec& task, const Policy& policy, std::uint64_t seed,
                          bool record_trajectory = false);

}  // namespace swarmneat
