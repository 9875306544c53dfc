#include "swarmneat/runner.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace swarmneat {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// config

TaskSpec RunConfig::make_task() const { return swarmneat::make_task(task, task_overrides); }

NeatConfig RunConfig::neat_for_task() const {
  NeatConfig c = neat;
  const TaskSpec t = make_task();
  c.genome.num_inputs = static_cast<int>(t.input_arity());
  c.genome.num_outputs = static_cast<int>(TaskSpec::output_arity());
  return c;
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"task", c.task},
           {"task_overrides", c.task_overrides},
           {"neat", c.neat},
           {"generations", c.generations},
           {"seed", c.seed},
           {"parallelism", c.parallelism},
           {"checkpoint_interval", c.checkpoint_interval},
           {"out_dir", c.out_dir}};
}

void from_json(const json& j, RunConfig& c) {
  c.task = j.value("task", c.task);
  if (j.contains("task_overrides")) c.task_overrides = j.at("task_overrides");
  if (j.contains("neat")) j.at("neat").get_to(c.neat);
  c.generations = j.value("generations", c.generations);
  c.seed = j.value("seed", c.seed);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
  c.out_dir = j.value("out_dir", c.out_dir);
  if (c.generations < 0) throw std::invalid_argument("generations must be >= 0");
  if (c.parallelism < 0) throw std::invalid_argument("parallelism must be >= 0");
}

RunConfig load_run_config(const fs::path& path) {
  RunConfig config;
  try {
    config = json::parse(read_file(path)).get<RunConfig>();
  } catch (const json::exception& e) {
    throw std::runtime_error("bad run config " + path.string() + ": " + e.what());
  }
  config.make_task().validate();
  if (config.generations < 0) throw std::runtime_error("bad run config: negative generations");
  return config;
}

// ---------------------------------------------------------------------------
// seeds and evaluation

std::uint64_t episode_seed(std::uint64_t global_seed, int generation, GenomeId genome) {
  return derive_seed({global_seed, kEpisodeSeedTag, static_cast<std::uint64_t>(generation),
                      static_cast<std::uint64_t>(genome)});
}

std::uint64_t trial_seed(std::uint64_t global_seed, int trial) {
  return derive_seed({global_seed, kTrialSeedTag, static_cast<std::uint64_t>(trial)});
}

void parallel_for(std::size_t jobs, int parallelism, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = parallelism > 0 ? static_cast<std::size_t>(parallelism)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = jobs;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::map<GenomeId, double> evaluate_generation(const std::map<GenomeId, Genome>& genomes,
                                               const TaskSpec& task, int generation,
                                               std::uint64_t global_seed, int parallelism) {
  std::vector<const Genome*> order;
  for (const auto& [_, g] : genomes) order.push_back(&g);
  std::vector<double> fitness(order.size());
  std::vector<std::string> failures(order.size());

  parallel_for(order.size(), parallelism, [&](std::size_t i) {
    const Genome& g = *order[i];
    try {
      NetworkPolicy policy(FeedForwardNetwork::compile(g), task.mode, task.sim,
                           "genome " + std::to_string(g.id));
      check_arity(task, policy);
      fitness[i] = run_episode(task, policy, episode_seed(global_seed, generation, g.id)).fitness;
    } catch (const CompileError& e) {
      fitness[i] = -std::numeric_limits<double>::infinity();
      failures[i] = e.what();
    } catch (const ArityError& e) {
      fitness[i] = -std::numeric_limits<double>::infinity();
      failures[i] = e.what();
    }
  });

  std::map<GenomeId, double> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    out[order[i]->id] = fitness[i];
    if (!failures[i].empty())
      std::cerr << "generation " << generation << ": genome " << order[i]->id
                << " not evaluated: " << failures[i] << '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// files

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

static double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

static std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

static const char* kEvolutionHeader = "generation,best,mean,stdev,species,best_genome_id";

std::string evolution_csv(const EvolutionReport& report) {
  std::ostringstream os;
  os << kEvolutionHeader << '\n';
  for (const auto& r : report.records)
    os << r.generation << ',' << format_double(r.best) << ',' << format_double(r.mean) << ','
       << format_double(r.stdev) << ',' << r.species_count << ',' << r.best_genome_id << '\n';
  return os.str();
}

EvolutionReport parse_evolution_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kEvolutionHeader)
    throw std::runtime_error("evolution CSV: missing or unexpected header");
  EvolutionReport report;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6)
      throw std::runtime_error("evolution CSV line " + std::to_string(lineno) + ": expected 6 fields");
    try {
      GenerationRecord r;
      r.generation = std::stoi(f[0]);
      r.best = parse_double(f[1]);
      r.mean = parse_double(f[2]);
      r.stdev = parse_double(f[3]);
      r.species_count = std::stoi(f[4]);
      r.best_genome_id = std::stoi(f[5]);
      report.records.push_back(r);
    } catch (const std::logic_error& e) {
      throw std::runtime_error("evolution CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// training

static json checkpoint_json(const RunConfig& config, const Population& pop) {
  return json{{"format", "swarmneat-checkpoint"},
              {"version", kCheckpointFormatVersion},
              {"run_config", config},
              {"population", pop.to_json()}};
}

TrainResult train(const RunConfig& config, bool resume, std::ostream* log) {
  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);
  const fs::path latest = out_dir / "checkpoint-latest.json";

  RunConfig run = config;
  std::optional<Population> pop;
  if (resume) {
    const json cp = json::parse(read_file(latest));
    if (cp.value("format", "") != "swarmneat-checkpoint" ||
        cp.value("version", 0) != kCheckpointFormatVersion)
      throw std::runtime_error(latest.string() + " is not a supported checkpoint");
    run = cp.at("run_config").get<RunConfig>();
    run.generations = config.generations;
    run.parallelism = config.parallelism;
    run.out_dir = config.out_dir;
    pop.emplace(Population::from_json(cp.at("population")));
  } else {
    pop.emplace(run.neat_for_task(), derive_seed({run.seed}));
  }

  const TaskSpec task = run.make_task();
  const fs::path csv_path = out_dir / "evolution.csv";

  auto evaluator = [&](const std::map<GenomeId, Genome>& genomes, int generation) {
    return evaluate_generation(genomes, task, generation, run.seed, run.parallelism);
  };
  auto on_generation = [&](const Population& p) {
    write_file(csv_path, evolution_csv(p.report()));
    const auto& rec = p.report().records.back();
    if (log)
      *log << "generation " << rec.generation << "  best " << format_double(rec.best) << "  mean "
           << format_double(rec.mean) << "  species " << rec.species_count << std::endl;
    const bool last = p.generation() >= run.generations;
    const bool periodic = run.checkpoint_interval > 0 && p.generation() % run.checkpoint_interval == 0;
    if (last || periodic) {
      const std::string text = checkpoint_json(run, p).dump(1);
      if (periodic)
        write_file(out_dir / ("checkpoint-" + std::to_string(p.generation()) + ".json"), text);
      write_file(latest, text);
    }
  };

  const int remaining = std::max(0, run.generations - pop->generation());
  pop->evolve(evaluator, remaining, on_generation);
  if (remaining == 0) write_file(csv_path, evolution_csv(pop->report()));

  TrainResult result;
  result.report = pop->report();
  result.csv_path = csv_path;
  if (pop->best_of_last_generation()) {
    result.best_genome = *pop->best_of_last_generation();
    const int gen = result.report.records.back().generation;
    json j = genome_to_json(result.best_genome);
    j["provenance"] = {{"task", run.task},
                       {"task_overrides", run.task_overrides},
                       {"generation", gen},
                       {"global_seed", run.seed},
                       {"episode_seed", episode_seed(run.seed, gen, result.best_genome.id)}};
    result.best_genome_path = out_dir / "best_genome.json";
    write_file(result.best_genome_path, j.dump(1));
  }
  return result;
}

// ---------------------------------------------------------------------------
// policies, comparison, replay

static json read_genome_record(const std::string& source) {
  try {
    return json::parse(read_file(source));
  } catch (const json::exception& e) {
    throw std::runtime_error("cannot parse genome file " + source + ": " + e.what());
  }
}

std::unique_ptr<Policy> load_policy(const std::string& source, const TaskSpec& task) {
  std::unique_ptr<Policy> policy;
  if (source == "designed") {
    policy = std::make_unique<DesignedPolicy>(task);
  } else {
    const Genome g = genome_from_json(read_genome_record(source));
    policy = std::make_unique<NetworkPolicy>(FeedForwardNetwork::compile(g), task.mode, task.sim,
                                             fs::path(source).filename().string());
  }
  check_arity(task, *policy);
  return policy;
}

ComparisonReport compare(const std::vector<std::string>& sources, const TaskSpec& task, int trials,
                         std::uint64_t seed, int parallelism) {
  if (trials < 2) throw std::invalid_argument("compare: need at least 2 trials");
  if (sources.empty()) throw std::invalid_argument("compare: no policies given");
  std::vector<std::unique_ptr<Policy>> policies;
  for (const auto& s : sources) policies.push_back(load_policy(s, task));

  ComparisonReport report;
  report.task = task.name;
  report.trials = trials;
  report.seed = seed;
  report.policies.resize(policies.size());
  for (std::size_t p = 0; p < policies.size(); ++p) {
    report.policies[p].name = sources[p] == "designed" ? policies[p]->name() : sources[p];
    report.policies[p].fitness.resize(static_cast<std::size_t>(trials));
  }

  const std::size_t per_policy = static_cast<std::size_t>(trials);
  parallel_for(policies.size() * per_policy, parallelism, [&](std::size_t job) {
    const std::size_t p = job / per_policy;
    const int t = static_cast<int>(job % per_policy);
    report.policies[p].fitness[static_cast<std::size_t>(t)] =
        run_episode(task, *policies[p], trial_seed(seed, t)).fitness;
  });

  for (auto& p : report.policies) p.summary = summarize(p.fitness);
  for (std::size_t a = 0; a < report.policies.size(); ++a)
    for (std::size_t b = a + 1; b < report.policies.size(); ++b)
      report.tests.push_back(
          {a, b, welch_t_test(report.policies[a].summary, report.policies[b].summary)});
  return report;
}

json to_json(const ComparisonReport& r) {
  json policies = json::array();
  for (const auto& p : r.policies)
    policies.push_back({{"name", p.name},
                        {"fitness", p.fitness},
                        {"mean", p.summary.mean},
                        {"stdev", p.summary.stdev},
                        {"n", p.summary.n}});
  json tests = json::array();
  for (const auto& t : r.tests)
    tests.push_back({{"a", r.policies[t.a].name},
                     {"b", r.policies[t.b].name},
                     {"t", t.welch.t},
                     {"df", t.welch.df},
                     {"p", t.welch.p}});
  return json{{"task", r.task}, {"trials", r.trials}, {"seed", r.seed},
              {"policies", policies}, {"welch", tests}};
}

std::string format_comparison(const ComparisonReport& r) {
  std::ostringstream os;
  os << "task " << r.task << ", " << r.trials << " trials, seed " << r.seed << '\n';
  for (const auto& p : r.policies)
    os << std::left << std::setw(32) << p.name << " mean " << std::fixed << std::setprecision(4)
       << p.summary.mean << "  stdev " << p.summary.stdev << '\n';
  for (const auto& t : r.tests)
    os << r.policies[t.a].name << " vs " << r.policies[t.b].name << ": t = " << std::setprecision(4)
       << t.welch.t << ", df = " << t.welch.df << ", p = " << std::setprecision(6) << t.welch.p
       << '\n';
  return os.str();
}

ReplayResult replay(const std::string& source, const TaskSpec& task, std::optional<std::uint64_t> seed) {
  auto policy = load_policy(source, task);
  ReplayResult out;
  out.seed = 1;
  if (seed) {
    out.seed = *seed;
  } else if (source != "designed") {
    const json j = read_genome_record(source);
    if (j.contains("provenance") && j["provenance"].value("task", "") == task.name)
      out.seed = j["provenance"].at("episode_seed").get<std::uint64_t>();
  }
  out.episode = run_episode(task, *policy, out.seed, true);
  return out;
}

std::string trajectory_csv(const TaskSpec& task, const EpisodeResult& episode) {
  std::ostringstream os;
  const Rect& b = task.arena.bounds;
  os << "# swarmneat-trajectory v1\n";
  os << "# arena " << format_double(b.x_min) << ' ' << format_double(b.x_max) << ' '
     << format_double(b.y_min) << ' ' << format_double(b.y_max) << '\n';
  if (task.arena.wall)
    os << "# wall " << format_double(task.arena.wall->height) << ' '
       << format_double(task.arena.wall->thickness) << '\n';
  os << "# fitness " << format_double(episode.fitness) << '\n';
  os << "time,agent,x,y,altitude,heading\n";
  for (const auto& r : episode.trajectory)
    os << format_double(r.time) << ',' << r.agent << ',' << format_double(r.x) << ','
       << format_double(r.y) << ',' << format_double(r.altitude) << ',' << format_double(r.heading)
       << '\n';
  return os.str();
}

TrajectoryLog parse_trajectory_csv(const std::string& text) {
  TrajectoryLog log;
  std::istringstream in(text);
  std::string line;
  bool have_arena = false, have_header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string key;
      meta >> key;
      if (key == "arena") {
        Rect& r = log.arena.bounds;
        if (!(meta >> r.x_min >> r.x_max >> r.y_min >> r.y_max))
          throw std::runtime_error("trajectory: malformed arena line");
        have_arena = true;
      } else if (key == "wall") {
        InteriorWall w;
        if (!(meta >> w.height >> w.thickness)) throw std::runtime_error("trajectory: malformed wall line");
        log.arena.wall = w;
      } else if (key == "fitness") {
        std::string v;
        meta >> v;
        log.fitness = parse_double(v);
      }
      continue;
    }
    if (!have_header) {
      if (line != "time,agent,x,y,altitude,heading")
        throw std::runtime_error("trajectory: unexpected header '" + line + "'");
      have_header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 6)
      throw std::runtime_error("trajectory line " + std::to_string(lineno) + ": expected 6 fields");
    try {
      log.rows.push_back({parse_double(f[0]), std::stoi(f[1]), parse_double(f[2]), parse_double(f[3]),
                          parse_double(f[4]), parse_double(f[5])});
    } catch (const std::logic_error& e) {
      throw std::runtime_error("trajectory line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_arena) throw std::runtime_error("trajectory: missing arena metadata");
  if (!have_header) throw std::runtime_error("trajectory: missing column header");
  log.arena.validate();
  return log;
}

}  // namespace swarmneat
