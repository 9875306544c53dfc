#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "swarmneat/genome.hpp"
#include "swarmneat/rng.hpp"

namespace swarmneat {

enum class SpeciesFitnessFunc { Mean, Max, Min, Median };

struct NeatConfig {
  GenomeConfig genome;
  int pop_size = 300;
  double compatibility_threshold = 3.0;
  SpeciesFitnessFunc species_fitness_func = SpeciesFitnessFunc::Mean;
  int max_stagnation = 15;
  int species_elitism = 2;
  int elitism = 2;
  double survival_threshold = 0.2;
  int min_species_size = 2;
  bool reset_on_extinction = true;
};

void to_json(nlohmann::json& j, const NeatConfig& c);
void from_json(const nlohmann::json& j, NeatConfig& c);

struct Species {
  int id = 0;
  int created = 0;
  Genome representative;
  std::vector<GenomeId> members;
  std::optional<double> fitness;
  std::vector<double> fitness_history;
  int last_improved = 0;

  bool operator==(const Species&) const = default;
};

struct GenerationRecord {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double stdev = 0.0;  // population standard deviation
  int species_count = 0;
  GenomeId best_genome_id = 0;

  bool operator==(const GenerationRecord&) const = default;
};

struct EvolutionReport {
  std::vector<GenerationRecord> records;
  bool operator==(const EvolutionReport&) const = default;
};

// Maps every genome id of the generation to its fitness. -infinity marks a
// genome that could not be evaluated; any other non-finite value is an error.
using Evaluator =
    std::function<std::map<GenomeId, double>(const std::map<GenomeId, Genome>&, int generation)>;

class Population {
public:
  Population(const NeatConfig& config, std::uint64_t seed);
  // Adopts an explicit genome set (ids taken from the genomes) and speciates it.
  Population(const NeatConfig& config, std::uint64_t seed, std::vector<Genome> genomes);

  const NeatConfig& config() const { return config_; }
  int generation() const { return generation_; }
  const std::map<GenomeId, Genome>& genomes() const { return genomes_; }
  std::map<GenomeId, Genome>& genomes() { return genomes_; }
  const std::map<int, Species>& species() const { return species_; }
  const InnovationRegistry& registry() const { return registry_; }
  const EvolutionReport& report() const { return report_; }

  // Best genome of the most recently evaluated generation (with fitness).
  const std::optional<Genome>& best_of_last_generation() const { return last_best_; }
  const std::optional<Genome>& best_ever() const { return best_ever_; }

  // Re-partitions the current genomes. Each genome joins the first species
  // (by id) whose representative is within `threshold`, otherwise it founds
  // a new species. Existing species first claim the genome closest to their
  // old representative as the new one.
  void speciate(double threshold);
  void speciate() { speciate(config_.compatibility_threshold); }

  // Requires every member to carry a fitness. Recomputes species fitness,
  // drops stagnant species (never the `species_elitism` fittest) and returns
  // the extinct ids.
  std::vector<int> update_stagnation(int max_stagnation, int species_elitism);
  std::vector<int> update_stagnation() {
    return update_stagnation(config_.max_stagnation, config_.species_elitism);
  }

  std::map<int, int> allocate_offspring() const;

  // Builds the next generation from `allocation` and increments the
  // generation counter. Species receive new members at the next speciate().
  void reproduce(const std::map<int, int>& allocation);

  // One call per generation: evaluate, record, stagnation, allocation,
  // reproduction, speciation. `on_generation` runs at each generation
  // boundary (after speciation) and is where checkpoints are taken.
  EvolutionReport evolve(const Evaluator& evaluator, int generations,
                         const std::function<void(const Population&)>& on_generation = {});

  // Test hook: observes (species id, parent a, parent b) for every crossover.
  void set_parent_observer(std::function<void(int, GenomeId, GenomeId)> observer) {
    parent_observer_ = std::move(observer);
  }

  double species_fitness(const Species& s) const;

  nlohmann::json to_json() const;
  static Population from_json(const nlohmann::json& j);

private:
  Population() = default;
  void seed_fresh_genomes();
  void assign_fitness(const std::map<GenomeId, double>& fitness);
  GenerationRecord record_generation();

  NeatConfig config_;
  Rng rng_;
  InnovationRegistry registry_;
  int generation_ = 0;
  GenomeId next_genome_id_ = 1;
  int next_species_id_ = 1;
  std::map<GenomeId, Genome> genomes_;
  std::map<int, Species> species_;
  EvolutionReport report_;
  std::optional<Genome> last_best_;
  std::optional<Genome> best_ever_;
  std::function<void(int, GenomeId, GenomeId)> parent_observer_;
};

inline constexpr int kCheckpointFormatVersion = 1;

}  // namespace swarmneat
