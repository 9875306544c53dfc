#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmneat/genome.hpp"

namespace swarmneat {

class CompileError : public std::runtime_error {
public:
  CompileError(const std::string& what, std::vector<NodeId> nodes)
      : std::runtime_error(what), nodes_(std::move(nodes)) {}
  const std::vector<NodeId>& nodes() const { return nodes_; }

private:
  std::vector<NodeId> nodes_;
};

// Steepness applied inside the sigmoid: 1 / (1 + exp(-kSigmoidSteepness * z)).
inline constexpr double kSigmoidSteepness = 5.0;

double activate(Activation a, double z);

// Immutable feed-forward phenotype. Activation does not mutate the network,
// so a single instance can be shared by every agent of a swarm and across
// threads.
class FeedForwardNetwork {
public:
  struct Link {
    std::size_t from;  // slot index
    double weight;
  };
  struct NodeEval {
    NodeId node;
    std::size_t slot;
    double bias;
    double response;
    Activation activation;
    Aggregation aggregation;
    std::vector<Link> links;
  };

  static FeedForwardNetwork compile(const Genome& genome);

  std::vector<double> activate(std::span<const double> inputs) const;

  std::size_t num_inputs() const { return num_inputs_; }
  std::size_t num_outputs() const { return output_slots_.size(); }

  // Node ids grouped by dependency depth; every node's inputs live in an
  // earlier layer.
  const std::vector<std::vector<NodeId>>& layers() const { return layers_; }
  const std::vector<NodeEval>& plan() const { return plan_; }

private:
  std::size_t num_inputs_ = 0;
  std::size_t num_slots_ = 0;
  std::vector<std::size_t> output_slots_;
  std::vector<NodeEval> plan_;
  std::vector<std::vector<NodeId>> layers_;
};

}  // namespace swarmneat
