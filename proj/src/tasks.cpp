#include "swarmneat/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace swarmneat {

using nlohmann::json;

std::int64_t TaskSpec::step_count() const {
  return static_cast<std::int64_t>(std::ceil(duration / sim.dt - 1e-9));
}

void TaskSpec::validate() const {
  arena.validate();
  sense.validate();
  if (n_agents < 1) throw std::invalid_argument("task needs at least one agent");
  if (!(duration > 0.0)) throw std::invalid_argument("task duration must be positive");
  if (log_every < 1) throw std::invalid_argument("log_every must be >= 1");
  if (fitness.kind == FitnessKind::DeploymentEntropy && fitness.grid < 1)
    throw std::invalid_argument("entropy grid must be >= 1");
  if (fitness.kind == FitnessKind::WallClimb && !arena.wall)
    throw std::invalid_argument("wall climb fitness needs an interior wall");
}

void to_json(json& j, const TaskSpec& t) {
  j = json{{"name", t.name},
           {"arena", t.arena},
           {"n_agents", t.n_agents},
           {"mode", to_string(t.mode)},
           {"sense", t.sense},
           {"spawn_region", t.spawn_region},
           {"duration", t.duration},
           {"sim", t.sim},
           {"fitness",
            {{"kind", t.fitness.kind == FitnessKind::WallClimb ? "wall_climb" : "deployment_entropy"},
             {"grid", t.fitness.grid},
             {"wall_x", t.fitness.wall_x}}},
           {"designed",
            {{"wall_bias_gain", t.designed.wall_bias_gain},
             {"wall_repulsion_weight", t.designed.wall_repulsion_weight},
             {"turn_gain", t.designed.turn_gain},
             {"wall_bias_x", t.designed.wall_bias_x},
             {"wall_bias_y", t.designed.wall_bias_y}}},
           {"log_every", t.log_every}};
}

void from_json(const json& j, TaskSpec& t) {
  t.name = j.value("name", t.name);
  if (j.contains("arena")) j.at("arena").get_to(t.arena);
  t.n_agents = j.value("n_agents", t.n_agents);
  if (j.contains("mode")) t.mode = parse_actuation(j.at("mode"));
  if (j.contains("sense")) j.at("sense").get_to(t.sense);
  if (j.contains("spawn_region")) j.at("spawn_region").get_to(t.spawn_region);
  t.duration = j.value("duration", t.duration);
  if (j.contains("sim")) j.at("sim").get_to(t.sim);
  if (j.contains("fitness")) {
    const auto& f = j.at("fitness");
    if (f.contains("kind")) {
      const std::string k = f.at("kind");
      if (k == "wall_climb") t.fitness.kind = FitnessKind::WallClimb;
      else if (k == "deployment_entropy") t.fitness.kind = FitnessKind::DeploymentEntropy;
      else throw std::invalid_argument("unknown fitness kind '" + k + "'");
    }
    t.fitness.grid = f.value("grid", t.fitness.grid);
    t.fitness.wall_x = f.value("wall_x", t.fitness.wall_x);
  }
  if (j.contains("designed")) {
    const auto& d = j.at("designed");
    t.designed.wall_bias_gain = d.value("wall_bias_gain", t.designed.wall_bias_gain);
    t.designed.wall_repulsion_weight = d.value("wall_repulsion_weight", t.designed.wall_repulsion_weight);
    t.designed.turn_gain = d.value("turn_gain", t.designed.turn_gain);
    t.designed.wall_bias_x = d.value("wall_bias_x", t.designed.wall_bias_x);
    t.designed.wall_bias_y = d.value("wall_bias_y", t.designed.wall_bias_y);
  }
  t.log_every = j.value("log_every", t.log_every);
  t.validate();
}

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"gtmab_area", "anki_area", "wall_climb_distance",
                                              "wall_climb_neighbor"};
  return names;
}

static TaskSpec builtin_task(const std::string& name) {
  TaskSpec t;
  t.name = name;
  t.duration = 60.0;
  if (name == "gtmab_area") {
    t.arena.bounds = {-8.0, 8.0, -8.0, 8.0};
    t.n_agents = 20;
    t.mode = ActuationMode::Blimp;
    t.sense = {8, SenseMode::Distance, 8.0, SenseFrame::World, true, false, 1.0, Inversion::Reciprocal};
    t.spawn_region = {-2.0, 2.0, -2.0, 2.0};
    t.sim.min_sep = 0.5;
    t.fitness = {FitnessKind::DeploymentEntropy, 4, 0.0};
  } else if (name == "anki_area") {
    t.arena.bounds = {-1.5, 1.5, -1.5, 1.5};
    t.n_agents = 10;
    t.mode = ActuationMode::Drive;
    t.sense = {8, SenseMode::Distance, 1.5, SenseFrame::Body, false, true, 1.0, Inversion::Reciprocal};
    t.spawn_region = {-0.5, 0.5, -0.5, 0.5};
    t.sim.min_sep = 0.15;
    t.fitness = {FitnessKind::DeploymentEntropy, 3, 0.0};
  } else if (name == "wall_climb_distance" || name == "wall_climb_neighbor") {
    t.arena.bounds = {-8.0, 8.0, -5.0, 5.0};
    t.arena.wall = InteriorWall{3.0, 0.1};
    t.n_agents = 20;
    t.mode = ActuationMode::Blimp;
    const SenseMode m = name == "wall_climb_distance" ? SenseMode::Distance : SenseMode::Neighbor;
    t.sense = {8, m, 8.0, SenseFrame::World, false, false, 1.0, Inversion::Reciprocal};
    t.spawn_region = {1.0, 7.0, -5.0, 5.0};
    t.sim.min_sep = 0.5;
    t.fitness = {FitnessKind::WallClimb, 4, 0.0};
  } else {
    throw std::invalid_argument("unknown task '" + name + "'");
  }
  return t;
}

TaskSpec make_task(const std::string& name, const json& overrides) {
  json j = builtin_task(name);
  if (!overrides.is_null() && !overrides.empty()) j.merge_patch(overrides);
  j["name"] = name;
  return j.get<TaskSpec>();
}

double deployment_entropy(std::span<const AgentState> agents, const Rect& bounds, int grid) {
  if (grid < 1) throw std::invalid_argument("deployment_entropy: grid must be >= 1");
  if (agents.empty()) return 0.0;
  const double cw = (bounds.x_max - bounds.x_min) / grid;
  const double ch = (bounds.y_max - bounds.y_min) / grid;
  auto cell = [grid](double v, double lo, double w) {
    return std::clamp(static_cast<int>(std::floor((v - lo) / w)), 0, grid - 1);
  };
  std::map<int, int> counts;
  for (const auto& a : agents)
    ++counts[cell(a.y, bounds.y_min, ch) * grid + cell(a.x, bounds.x_min, cw)];
  const double n = static_cast<double>(agents.size());
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    const double p = c / n;
    h -= p * std::log(p);
  }
  return h;
}

double wall_climb_fitness(std::span<const AgentState> agents, double wall_x) {
  if (agents.empty()) return 0.0;
  int crossed = 0;
  double closest = std::numeric_limits<double>::infinity();
  for (const auto& a : agents) {
    if (a.x < wall_x) ++crossed;
    closest = std::min(closest, std::abs(a.x - wall_x));
  }
  return crossed > 0 ? static_cast<double>(crossed) : -closest;
}

double task_fitness(const TaskSpec& task, const WorldState& final_state) {
  if (task.fitness.kind == FitnessKind::WallClimb)
    return wall_climb_fitness(final_state.agents, task.fitness.wall_x);
  return deployment_entropy(final_state.agents, task.arena.bounds, task.fitness.grid);
}

// ---------------------------------------------------------------------------
// designed policies

namespace {

constexpr double kDirectionEpsilon = 1e-9;

double wrap_pi(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

// Rotates a sensing-frame vector into the world frame.
std::pair<double, double> to_world(double dx, double dy, const AgentState& self, SenseFrame frame) {
  if (frame == SenseFrame::World) return {dx, dy};
  const double c = std::cos(self.heading), s = std::sin(self.heading);
  return {c * dx - s * dy, s * dx + c * dy};
}

}  // namespace

Command steer(double dx, double dy, const AgentState& self, ActuationMode mode, const SimParams& sim,
              double turn_gain) {
  const double norm = std::hypot(dx, dy);
  if (norm < kDirectionEpsilon) return mode == ActuationMode::Blimp ? Command::velocity(0, 0)
                                                                      : Command::wheels(0, 0);
  if (mode == ActuationMode::Blimp) return Command::velocity(sim.v_max * dx / norm, sim.v_max * dy / norm);

  const double error = wrap_pi(std::atan2(dy, dx) - self.heading);
  const double forward = sim.w_max * std::max(0.0, std::cos(error));
  const double omega = turn_gain * error;
  const double half_diff = 0.5 * omega * sim.wheelbase;
  return Command::wheels(std::clamp(forward - half_diff, -sim.w_max, sim.w_max),
                         std::clamp(forward + half_diff, -sim.w_max, sim.w_max));
}

Command designed_area_policy(const Observation& obs, const AgentState& self, const SenseSpec& sense,
                             ActuationMode mode, const SimParams& sim,
                             const DesignedPolicyParams& params) {
  if (obs.size() != sense.input_arity())
    throw std::invalid_argument("designed_area_policy: observation arity mismatch");
  double dx = 0.0, dy = 0.0;
  const auto k = static_cast<std::size_t>(sense.k);
  for (std::size_t i = 0; i < k; ++i) {
    const double b = ktant_center(static_cast<int>(i), sense.k);
    dx -= obs[i] * std::cos(b);
    dy -= obs[i] * std::sin(b);
    if (sense.include_walls) {
      dx -= params.wall_repulsion_weight * obs[k + i] * std::cos(b);
      dy -= params.wall_repulsion_weight * obs[k + i] * std::sin(b);
    }
  }
  if (std::hypot(dx, dy) < kDirectionEpsilon) return steer(0, 0, self, mode, sim, params.turn_gain);
  const auto [wx, wy] = to_world(dx, dy, self, sense.frame);
  return steer(wx, wy, self, mode, sim, params.turn_gain);
}

Command designed_wall_policy(const Observation& obs, const AgentState& self, const SenseSpec& sense,
                             ActuationMode mode, const SimParams& sim,
                             const DesignedPolicyParams& params) {
  if (obs.size() != sense.input_arity())
    throw std::invalid_argument("designed_wall_policy: observation arity mismatch");
  int best = -1;
  for (int i = 0; i < sense.k; ++i)
    if (obs[static_cast<std::size_t>(i)] > 0.0 &&
        (best < 0 || obs[static_cast<std::size_t>(i)] > obs[static_cast<std::size_t>(best)]))
      best = i;

  double dx = params.wall_bias_x, dy = params.wall_bias_y;
  double weight = 1.0;
  if (best >= 0) {
    const double b = ktant_center(best, sense.k);
    const auto [ax, ay] = to_world(std::cos(b), std::sin(b), self, sense.frame);
    dx = ax + params.wall_bias_gain * params.wall_bias_x;
    dy = ay + params.wall_bias_gain * params.wall_bias_y;
    weight = 1.0 + params.wall_bias_gain;
  }
  if (mode == ActuationMode::Blimp) {
    // Weighted mean of the two unit desires: the wall bias keeps acting as a
    // steady drift even when the attraction flips every tick inside a tight
    // cluster.
    const double scale = sim.v_max / weight;
    return Command::velocity(dx * scale, dy * scale);
  }
  return steer(dx, dy, self, mode, sim, params.turn_gain);
}

NetworkPolicy::NetworkPolicy(FeedForwardNetwork net, ActuationMode mode, SimParams sim, std::string name)
    : net_(std::move(net)), mode_(mode), sim_(sim), name_(std::move(name)) {}

Command NetworkPolicy::act(const Observation& obs, const AgentState&) const {
  const auto out = net_.activate(obs);
  return decode_command(out, mode_, sim_);
}

DesignedPolicy::DesignedPolicy(const TaskSpec& task) : task_(task) {}

std::string DesignedPolicy::name() const {
  return task_.fitness.kind == FitnessKind::WallClimb ? "designed_wall" : "designed_area";
}

Command DesignedPolicy::act(const Observation& obs, const AgentState& self) const {
  if (task_.fitness.kind == FitnessKind::WallClimb)
    return designed_wall_policy(obs, self, task_.sense, task_.mode, task_.sim, task_.designed);
  return designed_area_policy(obs, self, task_.sense, task_.mode, task_.sim, task_.designed);
}

// ---------------------------------------------------------------------------
// episodes

void check_arity(const TaskSpec& task, const Policy& policy) {
  if (policy.input_arity() != task.input_arity() || policy.output_arity() != task.output_arity())
    throw ArityError("policy '" + policy.name() + "' has " + std::to_string(policy.input_arity()) +
                     " inputs / " + std::to_string(policy.output_arity()) + " outputs; task '" +
                     task.name + "' needs " + std::to_string(task.input_arity()) + " / " +
                     std::to_string(task.output_arity()));
}

static void log_frame(const WorldState& w, std::vector<TrajectoryRow>& rows) {
  for (std::size_t i = 0; i < w.agents.size(); ++i) {
    const auto& a = w.agents[i];
    rows.push_back({w.time(), static_cast<int>(i), a.x, a.y, a.altitude, a.heading});
  }
}

EpisodeResult run_episode(const TaskSpec& task, const Policy& policy, std::uint64_t seed,
                          bool record_trajectory) {
  task.validate();
  check_arity(task, policy);

  Rng rng(seed);
  EpisodeResult result;
  WorldState world = spawn(task.arena, task.n_agents, task.spawn_region, task.mode, task.sim, rng);
  world.seed = seed;

  const std::int64_t steps = task.step_count();
  std::vector<Command> commands(world.agents.size());
  if (record_trajectory) log_frame(world, result.trajectory);
  for (std::int64_t s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < world.agents.size(); ++i)
      commands[i] = policy.act(observe(world, i, task.sense, task.sim), world.agents[i]);
    step(world, commands, task.sim);
    if (record_trajectory && (world.steps % task.log_every == 0 || world.steps == steps))
      log_frame(world, result.trajectory);
  }
  result.fitness = task_fitness(task, world);
  result.final_state = std::move(world);
  return result;
}

}  // namespace swarmneat
