#include "swarmneat/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace swarmneat {

using nlohmann::json;

static std::string to_string(SpeciesFitnessFunc f) {
  switch (f) {
    case SpeciesFitnessFunc::Mean: return "mean";
    case SpeciesFitnessFunc::Max: return "max";
    case SpeciesFitnessFunc::Min: return "min";
    case SpeciesFitnessFunc::Median: return "median";
  }
  return "?";
}

static SpeciesFitnessFunc parse_species_fitness(const std::string& s) {
  if (s == "mean") return SpeciesFitnessFunc::Mean;
  if (s == "max") return SpeciesFitnessFunc::Max;
  if (s == "min") return SpeciesFitnessFunc::Min;
  if (s == "median") return SpeciesFitnessFunc::Median;
  throw std::invalid_argument("unknown species_fitness_func '" + s + "'");
}

void to_json(json& j, const NeatConfig& c) {
  j = json{{"genome", c.genome},
           {"pop_size", c.pop_size},
           {"compatibility_threshold", c.compatibility_threshold},
           {"species_fitness_func", to_string(c.species_fitness_func)},
           {"max_stagnation", c.max_stagnation},
           {"species_elitism", c.species_elitism},
           {"elitism", c.elitism},
           {"survival_threshold", c.survival_threshold},
           {"min_species_size", c.min_species_size},
           {"reset_on_extinction", c.reset_on_extinction}};
}

void from_json(const json& j, NeatConfig& c) {
  if (j.contains("genome")) j.at("genome").get_to(c.genome);
  c.pop_size = j.value("pop_size", c.pop_size);
  c.compatibility_threshold = j.value("compatibility_threshold", c.compatibility_threshold);
  if (j.contains("species_fitness_func"))
    c.species_fitness_func = parse_species_fitness(j.at("species_fitness_func"));
  c.max_stagnation = j.value("max_stagnation", c.max_stagnation);
  c.species_elitism = j.value("species_elitism", c.species_elitism);
  c.elitism = j.value("elitism", c.elitism);
  c.survival_threshold = j.value("survival_threshold", c.survival_threshold);
  c.min_species_size = j.value("min_species_size", c.min_species_size);
  c.reset_on_extinction = j.value("reset_on_extinction", c.reset_on_extinction);
  if (c.pop_size < 1) throw std::invalid_argument("pop_size must be positive");
  if (!(c.compatibility_threshold > 0.0))
    throw std::invalid_argument("compatibility_threshold must be positive");
}

Population::Population(const NeatConfig& config, std::uint64_t seed)
    : config_(config), rng_(seed), registry_(config.genome.num_outputs) {
  seed_fresh_genomes();
  speciate();
}

Population::Population(const NeatConfig& config, std::uint64_t seed, std::vector<Genome> genomes)
    : config_(config), rng_(seed), registry_(config.genome.num_outputs) {
  for (auto& g : genomes) {
    next_genome_id_ = std::max(next_genome_id_, g.id + 1);
    genomes_.emplace(g.id, std::move(g));
  }
  speciate();
}

void Population::seed_fresh_genomes() {
  genomes_.clear();
  for (int i = 0; i < config_.pop_size; ++i) {
    const GenomeId id = next_genome_id_++;
    genomes_.emplace(id, new_minimal_genome(id, config_.genome, registry_, rng_));
  }
}

double Population::species_fitness(const Species& s) const {
  std::vector<double> f;
  for (GenomeId id : s.members) {
    const auto& g = genomes_.at(id);
    if (!g.fitness) throw std::logic_error("species member " + std::to_string(id) + " has no fitness");
    f.push_back(*g.fitness);
  }
  if (f.empty()) throw std::logic_error("species " + std::to_string(s.id) + " has no members");
  switch (config_.species_fitness_func) {
    case SpeciesFitnessFunc::Mean:
      return std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
    case SpeciesFitnessFunc::Max:
      return *std::max_element(f.begin(), f.end());
    case SpeciesFitnessFunc::Min:
      return *std::min_element(f.begin(), f.end());
    case SpeciesFitnessFunc::Median: {
      std::sort(f.begin(), f.end());
      const std::size_t n = f.size();
      return n % 2 ? f[n / 2] : 0.5 * (f[n / 2 - 1] + f[n / 2]);
    }
  }
  return 0.0;
}

void Population::speciate(double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("compatibility threshold must be positive");
  const auto& gc = config_.genome;

  std::vector<GenomeId> unspeciated;
  for (const auto& [id, _] : genomes_) unspeciated.push_back(id);

  std::map<int, GenomeId> reps;
  std::map<int, std::vector<GenomeId>> members;
  for (const auto& [sid, s] : species_) {
    if (unspeciated.empty()) break;
    auto best = unspeciated.begin();
    double best_d = std::numeric_limits<double>::infinity();
    for (auto it = unspeciated.begin(); it != unspeciated.end(); ++it) {
      const double d = distance(s.representative, genomes_.at(*it), gc);
      if (d < best_d) {
        best_d = d;
        best = it;
      }
    }
    reps[sid] = *best;
    members[sid] = {*best};
    unspeciated.erase(best);
  }

  for (GenomeId gid : unspeciated) {
    const Genome& g = genomes_.at(gid);
    bool placed = false;
    for (auto& [sid, rid] : reps) {
      if (distance(genomes_.at(rid), g, gc) < threshold) {
        members[sid].push_back(gid);
        placed = true;
        break;
      }
    }
    if (!placed) {
      const int sid = next_species_id_++;
      reps[sid] = gid;
      members[sid] = {gid};
    }
  }

  std::map<int, Species> next;
  for (auto& [sid, rid] : reps) {
    Species s;
    if (auto it = species_.find(sid); it != species_.end()) {
      s = std::move(it->second);
    } else {
      s.id = sid;
      s.created = generation_;
      s.last_improved = generation_;
    }
    s.representative = genomes_.at(rid);
    s.members = std::move(members[sid]);
    std::sort(s.members.begin(), s.members.end());
    s.fitness.reset();
    next.emplace(sid, std::move(s));
  }
  species_ = std::move(next);
}

std::vector<int> Population::update_stagnation(int max_stagnation, int species_elitism) {
  std::vector<Species*> order;
  for (auto& [sid, s] : species_) {
    const double prev = s.fitness_history.empty()
                            ? -std::numeric_limits<double>::infinity()
                            : *std::max_element(s.fitness_history.begin(), s.fitness_history.end());
    s.fitness = species_fitness(s);
    s.fitness_history.push_back(*s.fitness);
    if (*s.fitness > prev) s.last_improved = generation_;
    order.push_back(&s);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Species* a, const Species* b) { return *a->fitness < *b->fitness; });

  std::vector<int> extinct;
  std::size_t non_stagnant = order.size();
  for (std::size_t idx = 0; idx < order.size(); ++idx) {
    const Species& s = *order[idx];
    bool stagnant = false;
    if (non_stagnant > static_cast<std::size_t>(std::max(species_elitism, 0)))
      stagnant = generation_ - s.last_improved >= max_stagnation;
    if (order.size() - idx <= static_cast<std::size_t>(std::max(species_elitism, 0))) stagnant = false;
    if (stagnant) {
      --non_stagnant;
      extinct.push_back(s.id);
    }
  }
  for (int sid : extinct) species_.erase(sid);
  std::sort(extinct.begin(), extinct.end());
  return extinct;
}

std::map<int, int> Population::allocate_offspring() const {
  if (species_.empty()) throw std::logic_error("allocate_offspring: no living species");
  const int floor_size = std::max(config_.min_species_size, config_.elitism);

  double min_f = std::numeric_limits<double>::infinity();
  double max_f = -std::numeric_limits<double>::infinity();
  std::map<int, double> species_f;
  for (const auto& [sid, s] : species_) {
    for (GenomeId id : s.members) {
      const double f = *genomes_.at(id).fitness;
      min_f = std::min(min_f, f);
      max_f = std::max(max_f, f);
    }
    species_f[sid] = s.fitness ? *s.fitness : species_fitness(s);
  }
  const double range = std::max(1.0, max_f - min_f);

  std::vector<std::pair<int, double>> adjusted;  // (sid, adjusted fitness)
  for (const auto& [sid, f] : species_f) adjusted.emplace_back(sid, (f - min_f) / range);

  // When the floor cannot be honoured for everyone, only the fittest
  // species that fit are kept; the rest receive nothing.
  const std::size_t capacity =
      floor_size > 0 ? static_cast<std::size_t>(config_.pop_size / floor_size) : adjusted.size();
  if (adjusted.size() > capacity) {
    std::stable_sort(adjusted.begin(), adjusted.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    adjusted.resize(std::max<std::size_t>(capacity, 1));
    std::sort(adjusted.begin(), adjusted.end());
  }

  std::map<int, int> out;
  for (const auto& [sid, _] : species_) out[sid] = 0;

  const int base = std::min(floor_size, config_.pop_size / static_cast<int>(adjusted.size()));
  const int remaining = config_.pop_size - base * static_cast<int>(adjusted.size());
  double total = 0.0;
  for (const auto& [_, af] : adjusted) total += af;

  // Largest-remainder rounding of the proportional share of `remaining`.
  std::vector<std::pair<double, int>> fractions;
  int assigned = 0;
  for (const auto& [sid, af] : adjusted) {
    const double share = total > 0.0 ? af / total : 1.0 / static_cast<double>(adjusted.size());
    const double quota = share * remaining;
    const int whole = static_cast<int>(std::floor(quota));
    out[sid] = base + whole;
    assigned += whole;
    fractions.emplace_back(quota - whole, sid);
  }
  std::stable_sort(fractions.begin(), fractions.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int i = 0; i < remaining - assigned; ++i)
    ++out[fractions[static_cast<std::size_t>(i) % fractions.size()].second];
  return out;
}

void Population::reproduce(const std::map<int, int>& allocation) {
  registry_.start_generation();
  std::map<GenomeId, Genome> next;

  for (auto it = species_.begin(); it != species_.end();) {
    Species& s = it->second;
    auto alloc = allocation.find(s.id);
    int spawn = alloc == allocation.end() ? 0 : alloc->second;
    if (spawn <= 0) {
      it = species_.erase(it);
      continue;
    }

    std::vector<const Genome*> ranked;
    for (GenomeId id : s.members) ranked.push_back(&genomes_.at(id));
    std::stable_sort(ranked.begin(), ranked.end(), [](const Genome* a, const Genome* b) {
      return *a->fitness > *b->fitness;
    });

    const int elites = std::min({config_.elitism, spawn, static_cast<int>(ranked.size())});
    for (int i = 0; i < elites; ++i) {
      Genome copy = *ranked[static_cast<std::size_t>(i)];
      copy.fitness.reset();
      next.emplace(copy.id, std::move(copy));
    }
    spawn -= elites;

    const std::size_t cutoff = std::min(
        ranked.size(),
        std::max<std::size_t>(
            2, static_cast<std::size_t>(std::ceil(config_.survival_threshold *
                                                      static_cast<double>(ranked.size()) -
                                                  1e-9))));
    for (; spawn > 0; --spawn) {
      const Genome* a = ranked[rng_.below(cutoff)];
      const Genome* b = ranked[rng_.below(cutoff)];
      if (parent_observer_) parent_observer_(s.id, a->id, b->id);
      const bool a_fitter = *a->fitness >= *b->fitness;
      const GenomeId child_id = next_genome_id_++;
      Genome child = crossover(child_id, a_fitter ? *a : *b, a_fitter ? *b : *a, config_.genome, rng_);
      mutate(child, config_.genome, registry_, rng_);
      next.emplace(child_id, std::move(child));
    }
    s.members.clear();
    ++it;
  }

  genomes_ = std::move(next);
  ++generation_;
}

void Population::assign_fitness(const std::map<GenomeId, double>& fitness) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& [id, g] : genomes_) {
    auto it = fitness.find(id);
    if (it == fitness.end())
      throw std::runtime_error("evaluator returned no fitness for genome " + std::to_string(id));
    const double f = it->second;
    if (std::isnan(f) || f == std::numeric_limits<double>::infinity())
      throw std::runtime_error("evaluator returned non-finite fitness for genome " +
                               std::to_string(id));
    if (std::isfinite(f)) worst = std::min(worst, f);
  }
  if (!std::isfinite(worst)) worst = 0.0;
  // Failed evaluations rank with the worst evaluated member.
  for (auto& [id, g] : genomes_) {
    const double f = fitness.at(id);
    g.fitness = std::isfinite(f) ? f : worst;
  }
}

GenerationRecord Population::record_generation() {
  GenerationRecord r;
  r.generation = generation_;
  r.species_count = static_cast<int>(species_.size());
  double sum = 0.0;
  const Genome* best = nullptr;
  for (const auto& [_, g] : genomes_) {
    sum += *g.fitness;
    if (!best || *g.fitness > *best->fitness) best = &g;
  }
  const double n = static_cast<double>(genomes_.size());
  r.mean = sum / n;
  double var = 0.0;
  for (const auto& [_, g] : genomes_) var += (*g.fitness - r.mean) * (*g.fitness - r.mean);
  r.stdev = std::sqrt(var / n);
  r.best = *best->fitness;
  r.best_genome_id = best->id;
  last_best_ = *best;
  if (!best_ever_ || *best->fitness > *best_ever_->fitness) best_ever_ = *best;
  return r;
}

EvolutionReport Population::evolve(const Evaluator& evaluator, int generations,
                                   const std::function<void(const Population&)>& on_generation) {
  EvolutionReport out;
  for (int i = 0; i < generations; ++i) {
    assign_fitness(evaluator(genomes_, generation_));
    const GenerationRecord rec = record_generation();
    report_.records.push_back(rec);
    out.records.push_back(rec);

    update_stagnation();
    if (species_.empty()) {
      if (!config_.reset_on_extinction)
        throw std::runtime_error("all species went extinct at generation " +
                                 std::to_string(generation_));
      ++generation_;
      seed_fresh_genomes();
    } else {
      reproduce(allocate_offspring());
    }
    speciate();
    if (on_generation) on_generation(*this);
  }
  return out;
}

// ---------------------------------------------------------------------------
// checkpoint state

static json optional_genome(const std::optional<Genome>& g) {
  return g ? genome_to_json(*g) : json(nullptr);
}

json Population::to_json() const {
  json genomes = json::array();
  for (const auto& [_, g] : genomes_) genomes.push_back(genome_to_json(g));
  json species = json::array();
  for (const auto& [_, s] : species_) {
    species.push_back({{"id", s.id},
                       {"created", s.created},
                       {"representative", genome_to_json(s.representative)},
                       {"members", s.members},
                       {"fitness", s.fitness ? json(*s.fitness) : json(nullptr)},
                       {"fitness_history", s.fitness_history},
                       {"last_improved", s.last_improved}});
  }
  json report = json::array();
  for (const auto& r : report_.records)
    report.push_back({{"generation", r.generation},
                      {"best", r.best},
                      {"mean", r.mean},
                      {"stdev", r.stdev},
                      {"species_count", r.species_count},
                      {"best_genome_id", r.best_genome_id}});
  return json{{"format", "swarmneat-population"},
              {"version", kCheckpointFormatVersion},
              {"config", config_},
              {"generation", generation_},
              {"next_genome_id", next_genome_id_},
              {"next_species_id", next_species_id_},
              {"rng", rng_.state()},
              {"registry", registry_},
              {"genomes", std::move(genomes)},
              {"species", std::move(species)},
              {"report", std::move(report)},
              {"best_of_last_generation", optional_genome(last_best_)},
              {"best_ever", optional_genome(best_ever_)}};
}

Population Population::from_json(const json& j) {
  if (j.value("format", "") != "swarmneat-population")
    throw std::runtime_error("not a swarmneat population checkpoint");
  if (j.value("version", 0) != kCheckpointFormatVersion)
    throw std::runtime_error("unsupported checkpoint version");
  Population p;
  j.at("config").get_to(p.config_);
  p.generation_ = j.at("generation");
  p.next_genome_id_ = j.at("next_genome_id");
  p.next_species_id_ = j.at("next_species_id");
  p.rng_.restore(j.at("rng").get<std::string>());
  j.at("registry").get_to(p.registry_);
  for (const auto& g : j.at("genomes")) {
    Genome genome = genome_from_json(g);
    p.genomes_.emplace(genome.id, std::move(genome));
  }
  for (const auto& e : j.at("species")) {
    Species s;
    s.id = e.at("id");
    s.created = e.at("created");
    s.representative = genome_from_json(e.at("representative"));
    s.members = e.at("members").get<std::vector<GenomeId>>();
    if (!e.at("fitness").is_null()) s.fitness = e.at("fitness").get<double>();
    s.fitness_history = e.at("fitness_history").get<std::vector<double>>();
    s.last_improved = e.at("last_improved");
    p.species_.emplace(s.id, std::move(s));
  }
  for (const auto& e : j.at("report")) {
    GenerationRecord r;
    r.generation = e.at("generation");
    r.best = e.at("best");
    r.mean = e.at("mean");
    r.stdev = e.at("stdev");
    r.species_count = e.at("species_count");
    r.best_genome_id = e.at("best_genome_id");
    p.report_.records.push_back(r);
  }
  if (!j.at("best_of_last_generation").is_null())
    p.last_best_ = genome_from_json(j.at("best_of_last_generation"));
  if (!j.at("best_ever").is_null()) p.best_ever_ = genome_from_json(j.at("best_ever"));
  return p;
}

}  // namespace swarmneat
