#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "swarmneat/rng.hpp"

namespace swarmneat {

using NodeId = int;
using Innovation = int;
using GenomeId = int;

enum class NodeKind { Input, Output, Hidden };

enum class Activation { Sigmoid, Tanh, Identity };
enum class Aggregation { Sum, Product, Max, Min, Mean };

std::string to_string(NodeKind k);
std::string to_string(Activation a);
std::string to_string(Aggregation a);
Activation parse_activation(const std::string& s);
Aggregation parse_aggregation(const std::string& s);

// Input nodes use negative ids (-1 .. -num_inputs) and carry no evaluable
// attributes; output nodes are 0 .. num_outputs-1; hidden nodes follow.
struct NodeGene {
  NodeId id = 0;
  NodeKind kind = NodeKind::Hidden;
  double bias = 0.0;
  double response = 1.0;
  Activation activation = Activation::Sigmoid;
  Aggregation aggregation = Aggregation::Sum;

  bool operator==(const NodeGene&) const = default;
};

struct ConnectionGene {
  Innovation innovation = 0;
  NodeId source = 0;
  NodeId target = 0;
  double weight = 0.0;
  bool enabled = true;

  bool operator==(const ConnectionGene&) const = default;
};

// Gaussian-initialized, perturbable real attribute (weight, bias, response).
struct FloatAttributeConfig {
  double init_mean = 0.0;
  double init_stdev = 1.0;
  double min_value = -30.0;
  double max_value = 30.0;
  double mutate_rate = 0.8;
  double mutate_power = 0.5;
  double replace_rate = 0.1;

  double clamp(double v) const;
  double init(Rng& rng) const;
  double mutate(double v, Rng& rng) const;
};

struct GenomeConfig {
  int num_inputs = 1;
  int num_outputs = 1;

  FloatAttributeConfig weight{0.0, 1.0, -30.0, 30.0, 0.8, 0.5, 0.1};
  FloatAttributeConfig bias{0.0, 1.0, -30.0, 30.0, 0.7, 0.5, 0.1};
  FloatAttributeConfig response{1.0, 0.0, -30.0, 30.0, 0.0, 0.0, 0.0};

  Activation activation = Activation::Sigmoid;
  Aggregation aggregation = Aggregation::Sum;

  double node_add_prob = 0.2;
  double conn_add_prob = 0.5;
  double enabled_mutate_rate = 0.01;
  // Homologous genes whose enabled flags differ are inherited disabled with
  // this probability.
  double crossover_disable_prob = 0.75;

  double compatibility_disjoint_coefficient = 1.0;
  double compatibility_weight_coefficient = 0.5;

  bool feed_forward = true;
};

void to_json(nlohmann::json& j, const FloatAttributeConfig& c);
void from_json(const nlohmann::json& j, FloatAttributeConfig& c);
void to_json(nlohmann::json& j, const GenomeConfig& c);
void from_json(const nlohmann::json& j, GenomeConfig& c);

// Hands out innovation numbers and node ids so that identical structural
// mutations line up across genomes. Connection innovations are keyed by
// (source, target) for the whole run; node splits are keyed by the split
// connection and only shared within a generation.
class InnovationRegistry {
public:
  InnovationRegistry() = default;
  explicit InnovationRegistry(int num_outputs) : next_node_id_(num_outputs) {}

  Innovation connection(NodeId source, NodeId target);

  struct Split {
    NodeId node;
    Innovation in_innovation;
    Innovation out_innovation;
  };
  Split split(NodeId source, NodeId target);

  void start_generation() { splits_.clear(); }

  int next_node_id() const { return next_node_id_; }
  int next_innovation() const { return next_innovation_; }

  friend void to_json(nlohmann::json& j, const InnovationRegistry& r);
  friend void from_json(const nlohmann::json& j, InnovationRegistry& r);

  bool operator==(const InnovationRegistry&) const = default;

private:
  NodeId next_node_id_ = 0;
  Innovation next_innovation_ = 1;
  std::map<std::pair<NodeId, NodeId>, Innovation> connections_;
  std::map<std::pair<NodeId, NodeId>, NodeId> splits_;
};

class Genome {
public:
  GenomeId id = 0;
  std::map<NodeId, NodeGene> nodes;
  std::map<Innovation, ConnectionGene> connections;
  std::optional<double> fitness;

  int num_inputs() const;
  int num_outputs() const;
  std::vector<NodeId> input_ids() const;
  std::vector<NodeId> output_ids() const;

  const ConnectionGene* find_connection(NodeId source, NodeId target) const;

  // Would adding source->target close a cycle over all (enabled or disabled)
  // connections?
  bool creates_cycle(NodeId source, NodeId target) const;

  // Throws std::logic_error when an invariant is broken.
  void validate(bool feed_forward = true) const;

  bool operator==(const Genome&) const = default;
};

Genome new_minimal_genome(GenomeId id, const GenomeConfig& config,
                          InnovationRegistry& registry, Rng& rng);

// Structural mutations return true when they changed the genome.
bool mutate_add_node(Genome& g, const GenomeConfig& config,
                     InnovationRegistry& registry, Rng& rng);
bool mutate_add_connection(Genome& g, const GenomeConfig& config,
                           InnovationRegistry& registry, Rng& rng);

void mutate(Genome& g, const GenomeConfig& config, InnovationRegistry& registry,
            Rng& rng);

// Offspring takes the gene set of `fitter`; homologous genes mix attributes.
// Throws std::invalid_argument on input/output arity mismatch.
Genome crossover(GenomeId child_id, const Genome& fitter, const Genome& other,
                 const GenomeConfig& config, Rng& rng);

double distance(const Genome& a, const Genome& b, double disjoint_coeff,
                double weight_coeff);
inline double distance(const Genome& a, const Genome& b,
                       const GenomeConfig& config) {
  return distance(a, b, config.compatibility_disjoint_coefficient,
                  config.compatibility_weight_coefficient);
}

// Serialized form: {"format": "swarmneat-genome", "version": 1, ...}.
inline constexpr int kGenomeFormatVersion = 1;
nlohmann::json genome_to_json(const Genome& g);
Genome genome_from_json(const nlohmann::json& j);

}  // namespace swarmneat
