#include "swarmneat/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace swarmneat {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Sigmoid:
      z = std::clamp(z, -60.0, 60.0);
      return 1.0 / (1.0 + std::exp(-kSigmoidSteepness * z));
    case Activation::Tanh:
      return std::tanh(std::clamp(2.5 * z, -60.0, 60.0));
    case Activation::Identity:
      return z;
  }
  return z;
}

static double aggregate(Aggregation a, const std::vector<double>& terms) {
  if (terms.empty()) return 0.0;
  switch (a) {
    case Aggregation::Sum:
      return std::accumulate(terms.begin(), terms.end(), 0.0);
    case Aggregation::Product:
      return std::accumulate(terms.begin(), terms.end(), 1.0, std::multiplies<>());
    case Aggregation::Max:
      return *std::max_element(terms.begin(), terms.end());
    case Aggregation::Min:
      return *std::min_element(terms.begin(), terms.end());
    case Aggregation::Mean:
      return std::accumulate(terms.begin(), terms.end(), 0.0) / static_cast<double>(terms.size());
  }
  return 0.0;
}

FeedForwardNetwork FeedForwardNetwork::compile(const Genome& genome) {
  const auto inputs = genome.input_ids();
  const auto outputs = genome.output_ids();

  std::vector<const ConnectionGene*> enabled;
  for (const auto& [_, c] : genome.connections)
    if (c.enabled) enabled.push_back(&c);

  // Forward closure from the inputs.
  std::set<NodeId> reachable(inputs.begin(), inputs.end());
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto* c : enabled)
      if (reachable.contains(c->source) && reachable.insert(c->target).second) grew = true;
  }

  // Backward closure from the outputs, restricted to input-reachable nodes.
  std::set<NodeId> required(outputs.begin(), outputs.end());
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto* c : enabled)
      if (required.contains(c->target) && reachable.contains(c->source) &&
          genome.nodes.at(c->source).kind != NodeKind::Input &&
          required.insert(c->source).second)
        grew = true;
  }

  std::vector<const ConnectionGene*> live;
  for (const auto* c : enabled) {
    const bool from_input = genome.nodes.at(c->source).kind == NodeKind::Input;
    if (required.contains(c->target) && (from_input || required.contains(c->source)))
      live.push_back(c);
  }

  // Kahn layering over the required nodes.
  std::map<NodeId, int> pending;
  for (NodeId n : required) pending[n] = 0;
  for (const auto* c : live)
    if (genome.nodes.at(c->source).kind != NodeKind::Input) ++pending[c->target];

  FeedForwardNetwork net;
  net.num_inputs_ = inputs.size();
  std::map<NodeId, std::size_t> slot;
  for (std::size_t i = 0; i < inputs.size(); ++i) slot[inputs[i]] = i;
  std::size_t next_slot = inputs.size();

  std::vector<NodeId> frontier;
  for (const auto& [n, d] : pending)
    if (d == 0) frontier.push_back(n);
  while (!frontier.empty()) {
    net.layers_.push_back(frontier);
    std::vector<NodeId> next;
    for (NodeId n : frontier) {
      slot[n] = next_slot++;
      for (const auto* c : live)
        if (c->source == n && --pending[c->target] == 0) next.push_back(c->target);
    }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }

  std::set<NodeId> blocked;
  for (const auto& [n, d] : pending)
    if (d > 0) blocked.insert(n);
  // Peel off nodes that only sit downstream of a cycle.
  for (bool shrunk = true; shrunk;) {
    shrunk = false;
    for (auto it = blocked.begin(); it != blocked.end();) {
      const bool feeds_blocked = std::any_of(live.begin(), live.end(), [&](const auto* c) {
        return c->source == *it && blocked.contains(c->target);
      });
      if (feeds_blocked) {
        ++it;
      } else {
        it = blocked.erase(it);
        shrunk = true;
      }
    }
  }
  const std::vector<NodeId> stuck(blocked.begin(), blocked.end());
  if (!stuck.empty()) {
    std::ostringstream os;
    os << "cycle among nodes";
    for (NodeId n : stuck) os << ' ' << n;
    throw CompileError(os.str(), stuck);
  }

  for (const auto& layer : net.layers_) {
    for (NodeId n : layer) {
      const NodeGene& gene = genome.nodes.at(n);
      NodeEval e{n, slot.at(n), gene.bias, gene.response, gene.activation, gene.aggregation, {}};
      for (const auto* c : live)
        if (c->target == n) e.links.push_back({slot.at(c->source), c->weight});
      net.plan_.push_back(std::move(e));
    }
  }
  net.num_slots_ = next_slot;
  for (NodeId o : outputs) net.output_slots_.push_back(slot.at(o));
  return net;
}

std::vector<double> FeedForwardNetwork::activate(std::span<const double> inputs) const {
  if (inputs.size() != num_inputs_)
    throw std::invalid_argument("network expects " + std::to_string(num_inputs_) +
                                " inputs, got " + std::to_string(inputs.size()));
  std::vector<double> values(num_slots_, 0.0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!std::isfinite(inputs[i]))
      throw std::invalid_argument("non-finite network input at index " + std::to_string(i));
    values[i] = inputs[i];
  }
  std::vector<double> terms;
  for (const auto& e : plan_) {
    terms.clear();
    for (const auto& l : e.links) terms.push_back(values[l.from] * l.weight);
    values[e.slot] = swarmneat::activate(e.activation, e.bias + e.response * aggregate(e.aggregation, terms));
  }
  std::vector<double> out;
  out.reserve(output_slots_.size());
  for (auto s : output_slots_) out.push_back(values[s]);
  return out;
}

}  // namespace swarmneat
