#pragma once

#include "swarmneat/genome.hpp"
#include "swarmneat/rng.hpp"

namespace swarmneat::testing {

inline GenomeConfig config_for(int inputs, int outputs) {
  GenomeConfig c;
  c.num_inputs = inputs;
  c.num_outputs = outputs;
  return c;
}

// A random genome grown by `steps` mutations from a minimal one.
inline Genome random_genome(GenomeId id, const GenomeConfig& config,
                            InnovationRegistry& registry, Rng& rng, int steps) {
  Genome g = new_minimal_genome(id, config, registry, rng);
  for (int i = 0; i < steps; ++i) mutate(g, config, registry, rng);
  return g;
}

}  // namespace swarmneat::testing
