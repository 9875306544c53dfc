#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmneat/population.hpp"
#include "swarmneat/stats.hpp"
#include "swarmneat/tasks.hpp"

namespace swarmneat {

struct RunConfig {
  std::string task = "wall_climb_neighbor";
  nlohmann::json task_overrides = nlohmann::json::object();
  NeatConfig neat;
  int generations = 50;
  std::uint64_t seed = 1;
  int parallelism = 1;  // 0: one worker per hardware thread
  int checkpoint_interval = 10;
  std::string out_dir = "run";

  // The task with overrides applied; also fixes the genome arities.
  TaskSpec make_task() const;
  NeatConfig neat_for_task() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_run_config(const std::filesystem::path& path);

// Seed tags keep the derivations for different purposes disjoint.
inline constexpr std::uint64_t kEpisodeSeedTag = 1;
inline constexpr std::uint64_t kTrialSeedTag = 2;

std::uint64_t episode_seed(std::uint64_t global_seed, int generation, GenomeId genome);
std::uint64_t trial_seed(std::uint64_t global_seed, int trial);

// One episode per genome, seeded by episode_seed(). Genomes that fail to
// compile for the task get -infinity. Results do not depend on `parallelism`.
std::map<GenomeId, double> evaluate_generation(const std::map<GenomeId, Genome>& genomes,
                                               const TaskSpec& task, int generation,
                                               std::uint64_t global_seed, int parallelism);

// Runs `jobs` indexed tasks on up to `parallelism` threads; exceptions from a
// job are rethrown after all workers joined.
void parallel_for(std::size_t jobs, int parallelism, const std::function<void(std::size_t)>& fn);

struct TrainResult {
  EvolutionReport report;
  Genome best_genome;
  std::filesystem::path best_genome_path;
  std::filesystem::path csv_path;
};

// Evolution CSV, schema version 1:
//   generation,best,mean,stdev,species,best_genome_id
inline constexpr int kEvolutionCsvVersion = 1;
std::string evolution_csv(const EvolutionReport& report);
EvolutionReport parse_evolution_csv(const std::string& text);

// Trains from scratch, or continues from <out_dir>/checkpoint-latest.json
// when `resume` is set. Writes evolution.csv, periodic checkpoints and
// best_genome.json under config.out_dir.
TrainResult train(const RunConfig& config, bool resume = false, std::ostream* log = nullptr);

// A policy given as a genome file path or as "designed".
std::unique_ptr<Policy> load_policy(const std::string& source, const TaskSpec& task);

struct PolicyTrials {
  std::string name;
  std::vector<double> fitness;
  SampleSummary summary;
};

struct PairwiseTest {
  std::size_t a = 0, b = 0;
  WelchResult welch;
};

struct ComparisonReport {
  std::string task;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<PolicyTrials> policies;
  std::vector<PairwiseTest> tests;
};

nlohmann::json to_json(const ComparisonReport& r);
std::string format_comparison(const ComparisonReport& r);

// Every policy runs the same trial seeds (paired by trial index).
ComparisonReport compare(const std::vector<std::string>& sources, const TaskSpec& task, int trials,
                         std::uint64_t seed, int parallelism = 1);

// Single fully logged episode. When `seed` is absent the episode seed stored
// in a trained genome's provenance is reused.
struct ReplayResult {
  EpisodeResult episode;
  std::uint64_t seed = 0;
};
ReplayResult replay(const std::string& source, const TaskSpec& task, std::optional<std::uint64_t> seed);

// Trajectory table: '#'-prefixed metadata lines (arena geometry, fitness),
// then a header and rows of time,agent,x,y,altitude,heading.
std::string trajectory_csv(const TaskSpec& task, const EpisodeResult& episode);

struct TrajectoryLog {
  ArenaSpec arena;
  std::optional<double> fitness;
  std::vector<TrajectoryRow> rows;
};
TrajectoryLog parse_trajectory_csv(const std::string& text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Shortest text that round-trips the double.
std::string format_double(double v);

}  // namespace swarmneat
