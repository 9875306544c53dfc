#include "swarmneat/genome.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace swarmneat {

using nlohmann::json;

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Input: return "input";
    case NodeKind::Output: return "output";
    case NodeKind::Hidden: return "hidden";
  }
  return "?";
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "?";
}

std::string to_string(Aggregation a) {
  switch (a) {
    case Aggregation::Sum: return "sum";
    case Aggregation::Product: return "product";
    case Aggregation::Max: return "max";
    case Aggregation::Min: return "min";
    case Aggregation::Mean: return "mean";
  }
  return "?";
}

Activation parse_activation(const std::string& s) {
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "sum") return Aggregation::Sum;
  if (s == "product") return Aggregation::Product;
  if (s == "max") return Aggregation::Max;
  if (s == "min") return Aggregation::Min;
  if (s == "mean") return Aggregation::Mean;
  throw std::invalid_argument("unknown aggregation '" + s + "'");
}

static NodeKind parse_kind(const std::string& s) {
  if (s == "input") return NodeKind::Input;
  if (s == "output") return NodeKind::Output;
  if (s == "hidden") return NodeKind::Hidden;
  throw std::invalid_argument("unknown node kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// attribute configuration

double FloatAttributeConfig::clamp(double v) const {
  return std::clamp(v, min_value, max_value);
}

double FloatAttributeConfig::init(Rng& rng) const {
  return clamp(rng.gaussian(init_mean, init_stdev));
}

double FloatAttributeConfig::mutate(double v, Rng& rng) const {
  const double r = rng.uniform();
  if (r < mutate_rate) return clamp(v + rng.gaussian(0.0, mutate_power));
  if (r < mutate_rate + replace_rate) return init(rng);
  return v;
}

void to_json(json& j, const FloatAttributeConfig& c) {
  j = json{{"init_mean", c.init_mean},       {"init_stdev", c.init_stdev},
           {"min_value", c.min_value},       {"max_value", c.max_value},
           {"mutate_rate", c.mutate_rate},   {"mutate_power", c.mutate_power},
           {"replace_rate", c.replace_rate}};
}

void from_json(const json& j, FloatAttributeConfig& c) {
  c.init_mean = j.value("init_mean", c.init_mean);
  c.init_stdev = j.value("init_stdev", c.init_stdev);
  c.min_value = j.value("min_value", c.min_value);
  c.max_value = j.value("max_value", c.max_value);
  c.mutate_rate = j.value("mutate_rate", c.mutate_rate);
  c.mutate_power = j.value("mutate_power", c.mutate_power);
  c.replace_rate = j.value("replace_rate", c.replace_rate);
}

void to_json(json& j, const GenomeConfig& c) {
  j = json{{"num_inputs", c.num_inputs},
           {"num_outputs", c.num_outputs},
           {"weight", c.weight},
           {"bias", c.bias},
           {"response", c.response},
           {"activation", to_string(c.activation)},
           {"aggregation", to_string(c.aggregation)},
           {"node_add_prob", c.node_add_prob},
           {"conn_add_prob", c.conn_add_prob},
           {"enabled_mutate_rate", c.enabled_mutate_rate},
           {"crossover_disable_prob", c.crossover_disable_prob},
           {"compatibility_disjoint_coefficient", c.compatibility_disjoint_coefficient},
           {"compatibility_weight_coefficient", c.compatibility_weight_coefficient},
           {"feed_forward", c.feed_forward}};
}

void from_json(const json& j, GenomeConfig& c) {
  c.num_inputs = j.value("num_inputs", c.num_inputs);
  c.num_outputs = j.value("num_outputs", c.num_outputs);
  if (j.contains("weight")) j.at("weight").get_to(c.weight);
  if (j.contains("bias")) j.at("bias").get_to(c.bias);
  if (j.contains("response")) j.at("response").get_to(c.response);
  if (j.contains("activation")) c.activation = parse_activation(j.at("activation"));
  if (j.contains("aggregation")) c.aggregation = parse_aggregation(j.at("aggregation"));
  c.node_add_prob = j.value("node_add_prob", c.node_add_prob);
  c.conn_add_prob = j.value("conn_add_prob", c.conn_add_prob);
  c.enabled_mutate_rate = j.value("enabled_mutate_rate", c.enabled_mutate_rate);
  c.crossover_disable_prob = j.value("crossover_disable_prob", c.crossover_disable_prob);
  c.compatibility_disjoint_coefficient =
      j.value("compatibility_disjoint_coefficient", c.compatibility_disjoint_coefficient);
  c.compatibility_weight_coefficient =
      j.value("compatibility_weight_coefficient", c.compatibility_weight_coefficient);
  c.feed_forward = j.value("feed_forward", c.feed_forward);
  if (!c.feed_forward)
    throw std::invalid_argument("recurrent genomes are not supported (feed_forward must be true)");
}

// ---------------------------------------------------------------------------
// innovation registry

Innovation InnovationRegistry::connection(NodeId source, NodeId target) {
  auto [it, inserted] = connections_.try_emplace({source, target}, next_innovation_);
  if (inserted) ++next_innovation_;
  return it->second;
}

InnovationRegistry::Split InnovationRegistry::split(NodeId source, NodeId target) {
  auto [it, inserted] = splits_.try_emplace({source, target}, next_node_id_);
  if (inserted) ++next_node_id_;
  const NodeId node = it->second;
  return {node, connection(source, node), connection(node, target)};
}

static json pair_table(const std::map<std::pair<NodeId, NodeId>, int>& m) {
  json arr = json::array();
  for (const auto& [k, v] : m) arr.push_back({k.first, k.second, v});
  return arr;
}

static std::map<std::pair<NodeId, NodeId>, int> pair_table(const json& arr) {
  std::map<std::pair<NodeId, NodeId>, int> m;
  for (const auto& e : arr) m[{e.at(0).get<int>(), e.at(1).get<int>()}] = e.at(2).get<int>();
  return m;
}

void to_json(json& j, const InnovationRegistry& r) {
  j = json{{"next_node_id", r.next_node_id_},
           {"next_innovation", r.next_innovation_},
           {"connections", pair_table(r.connections_)},
           {"splits", pair_table(r.splits_)}};
}

void from_json(const json& j, InnovationRegistry& r) {
  r.next_node_id_ = j.at("next_node_id");
  r.next_innovation_ = j.at("next_innovation");
  r.connections_ = pair_table(j.at("connections"));
  r.splits_ = pair_table(j.at("splits"));
}

// ---------------------------------------------------------------------------
// genome

int Genome::num_inputs() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const auto& kv) {
    return kv.second.kind == NodeKind::Input;
  }));
}

int Genome::num_outputs() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const auto& kv) {
    return kv.second.kind == NodeKind::Output;
  }));
}

std::vector<NodeId> Genome::input_ids() const {
  std::vector<NodeId> ids;
  const int n = num_inputs();
  for (int i = 1; i <= n; ++i) ids.push_back(-i);
  return ids;
}

std::vector<NodeId> Genome::output_ids() const {
  std::vector<NodeId> ids;
  const int n = num_outputs();
  for (int i = 0; i < n; ++i) ids.push_back(i);
  return ids;
}

const ConnectionGene* Genome::find_connection(NodeId source, NodeId target) const {
  for (const auto& [_, c] : connections)
    if (c.source == source && c.target == target) return &c;
  return nullptr;
}

bool Genome::creates_cycle(NodeId source, NodeId target) const {
  if (source == target) return true;
  // Adding source->target closes a cycle iff source is reachable from target.
  std::set<NodeId> visited{target};
  std::vector<NodeId> stack{target};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    for (const auto& [_, c] : connections) {
      if (c.source != n) continue;
      if (c.target == source) return true;
      if (visited.insert(c.target).second) stack.push_back(c.target);
    }
  }
  return false;
}

void Genome::validate(bool feed_forward) const {
  for (const auto& [id, n] : nodes) {
    if (id != n.id) throw std::logic_error("node key/id mismatch");
    if (n.kind == NodeKind::Input && id >= 0) throw std::logic_error("input node with non-negative id");
    if (n.kind != NodeKind::Input && id < 0) throw std::logic_error("non-input node with negative id");
  }
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const auto& [key, c] : connections) {
    if (key != c.innovation) throw std::logic_error("connection key/innovation mismatch");
    if (!nodes.contains(c.source) || !nodes.contains(c.target))
      throw std::logic_error("connection references a missing node");
    if (nodes.at(c.target).kind == NodeKind::Input)
      throw std::logic_error("connection into an input node");
    if (!pairs.insert({c.source, c.target}).second)
      throw std::logic_error("duplicate (source, target) connection");
  }
  if (feed_forward) {
    // Kahn over the full connection graph.
    std::map<NodeId, int> indegree;
    for (const auto& [id, _] : nodes) indegree[id] = 0;
    for (const auto& [_, c] : connections) ++indegree[c.target];
    std::vector<NodeId> ready;
    for (const auto& [id, d] : indegree)
      if (d == 0) ready.push_back(id);
    std::size_t seen = 0;
    while (!ready.empty()) {
      const NodeId n = ready.back();
      ready.pop_back();
      ++seen;
      for (const auto& [_, c] : connections)
        if (c.source == n && --indegree[c.target] == 0) ready.push_back(c.target);
    }
    if (seen != nodes.size()) throw std::logic_error("connection graph contains a cycle");
  }
}

static NodeGene make_node(NodeId id, NodeKind kind, const GenomeConfig& config, Rng& rng) {
  NodeGene n;
  n.id = id;
  n.kind = kind;
  if (kind == NodeKind::Input) {
    n.bias = 0.0;
    n.response = 1.0;
    n.activation = Activation::Identity;
    n.aggregation = Aggregation::Sum;
    return n;
  }
  n.bias = config.bias.init(rng);
  n.response = config.response.init(rng);
  n.activation = config.activation;
  n.aggregation = config.aggregation;
  return n;
}

Genome new_minimal_genome(GenomeId id, const GenomeConfig& config,
                          InnovationRegistry& registry, Rng& rng) {
  if (config.num_inputs < 1 || config.num_outputs < 1)
    throw std::invalid_argument("genome needs at least one input and one output");
  Genome g;
  g.id = id;
  for (int i = 1; i <= config.num_inputs; ++i)
    g.nodes.emplace(-i, make_node(-i, NodeKind::Input, config, rng));
  for (int o = 0; o < config.num_outputs; ++o)
    g.nodes.emplace(o, make_node(o, NodeKind::Output, config, rng));
  for (int i = 1; i <= config.num_inputs; ++i) {
    for (int o = 0; o < config.num_outputs; ++o) {
      ConnectionGene c;
      c.innovation = registry.connection(-i, o);
      c.source = -i;
      c.target = o;
      c.weight = config.weight.init(rng);
      c.enabled = true;
      g.connections.emplace(c.innovation, c);
    }
  }
  return g;
}

bool mutate_add_node(Genome& g, const GenomeConfig& config,
                     InnovationRegistry& registry, Rng& rng) {
  std::vector<Innovation> candidates;
  for (const auto& [key, c] : g.connections)
    if (c.enabled) candidates.push_back(key);
  if (candidates.empty()) return false;

  ConnectionGene& old = g.connections.at(candidates[rng.below(candidates.size())]);
  const auto split = registry.split(old.source, old.target);
  if (g.nodes.contains(split.node)) return false;  // already split this generation
  old.enabled = false;

  NodeGene node = make_node(split.node, NodeKind::Hidden, config, rng);
  g.nodes.emplace(node.id, node);
  g.connections.emplace(split.in_innovation,
                        ConnectionGene{split.in_innovation, old.source, split.node, 1.0, true});
  g.connections.emplace(split.out_innovation,
                        ConnectionGene{split.out_innovation, split.node, old.target, old.weight, true});
  return true;
}

bool mutate_add_connection(Genome& g, const GenomeConfig& config,
                           InnovationRegistry& registry, Rng& rng) {
  std::set<std::pair<NodeId, NodeId>> existing;
  for (const auto& [_, c] : g.connections) existing.insert({c.source, c.target});

  std::vector<std::pair<NodeId, NodeId>> legal;
  for (const auto& [target, tn] : g.nodes) {
    if (tn.kind == NodeKind::Input) continue;
    for (const auto& [source, sn] : g.nodes) {
      if (source == target) continue;
      if (sn.kind == NodeKind::Output && tn.kind == NodeKind::Output) continue;
      if (existing.contains({source, target})) continue;
      if (config.feed_forward && g.creates_cycle(source, target)) continue;
      legal.emplace_back(source, target);
    }
  }
  if (legal.empty()) return false;

  const auto [source, target] = legal[rng.below(legal.size())];
  ConnectionGene c;
  c.innovation = registry.connection(source, target);
  c.source = source;
  c.target = target;
  c.weight = config.weight.init(rng);
  c.enabled = true;
  g.connections.emplace(c.innovation, c);
  return true;
}

void mutate(Genome& g, const GenomeConfig& config, InnovationRegistry& registry, Rng& rng) {
  if (rng.chance(config.node_add_prob)) mutate_add_node(g, config, registry, rng);
  if (rng.chance(config.conn_add_prob)) mutate_add_connection(g, config, registry, rng);

  for (auto& [_, c] : g.connections) {
    c.weight = config.weight.mutate(c.weight, rng);
    if (rng.chance(config.enabled_mutate_rate)) c.enabled = rng.chance(0.5);
  }
  for (auto& [_, n] : g.nodes) {
    if (n.kind == NodeKind::Input) continue;
    n.bias = config.bias.mutate(n.bias, rng);
    n.response = config.response.mutate(n.response, rng);
  }
}

template <typename T>
static const T& pick(const T& a, const T& b, Rng& rng) {
  return rng.chance(0.5) ? a : b;
}

Genome crossover(GenomeId child_id, const Genome& fitter, const Genome& other,
                 const GenomeConfig& config, Rng& rng) {
  if (fitter.num_inputs() != other.num_inputs() || fitter.num_outputs() != other.num_outputs())
    throw std::invalid_argument("crossover: parents differ in input/output arity");

  Genome child;
  child.id = child_id;

  for (const auto& [key, c1] : fitter.connections) {
    auto it = other.connections.find(key);
    if (it == other.connections.end()) {
      child.connections.emplace(key, c1);
      continue;
    }
    const ConnectionGene& c2 = it->second;
    ConnectionGene c = c1;
    c.weight = pick(c1.weight, c2.weight, rng);
    if (c1.enabled != c2.enabled)
      c.enabled = !rng.chance(config.crossover_disable_prob);
    child.connections.emplace(key, c);
  }

  for (const auto& [key, n1] : fitter.nodes) {
    auto it = other.nodes.find(key);
    if (it == other.nodes.end() || n1.kind == NodeKind::Input) {
      child.nodes.emplace(key, n1);
      continue;
    }
    const NodeGene& n2 = it->second;
    NodeGene n = n1;
    n.bias = pick(n1.bias, n2.bias, rng);
    n.response = pick(n1.response, n2.response, rng);
    n.activation = pick(n1.activation, n2.activation, rng);
    n.aggregation = pick(n1.aggregation, n2.aggregation, rng);
    child.nodes.emplace(key, n);
  }
  return child;
}

static double node_attribute_distance(const NodeGene& a, const NodeGene& b) {
  double d = std::abs(a.bias - b.bias) + std::abs(a.response - b.response);
  if (a.activation != b.activation) d += 1.0;
  if (a.aggregation != b.aggregation) d += 1.0;
  return d;
}

static double connection_attribute_distance(const ConnectionGene& a, const ConnectionGene& b) {
  double d = std::abs(a.weight - b.weight);
  if (a.enabled != b.enabled) d += 1.0;
  return d;
}

// (weight_coeff * sum of homologous attribute distances + disjoint_coeff *
// disjoint count) / larger gene count. Inputs are not genes for this purpose.
template <typename Map, typename Keep, typename AttrDistance>
static double gene_distance(const Map& a, const Map& b, Keep keep, AttrDistance attr,
                            double disjoint_coeff, double weight_coeff) {
  std::size_t count_a = 0, count_b = 0, disjoint = 0;
  double homologous = 0.0;
  for (const auto& [key, ga] : a) {
    if (!keep(ga)) continue;
    ++count_a;
    auto it = b.find(key);
    if (it == b.end()) {
      ++disjoint;
    } else {
      homologous += attr(ga, it->second);
    }
  }
  for (const auto& [key, gb] : b) {
    if (!keep(gb)) continue;
    ++count_b;
    if (!a.contains(key)) ++disjoint;
  }
  const std::size_t larger = std::max(count_a, count_b);
  if (larger == 0) return 0.0;
  return (weight_coeff * homologous + disjoint_coeff * static_cast<double>(disjoint)) /
         static_cast<double>(larger);
}

double distance(const Genome& a, const Genome& b, double disjoint_coeff, double weight_coeff) {
  const double nodes = gene_distance(
      a.nodes, b.nodes, [](const NodeGene& n) { return n.kind != NodeKind::Input; },
      node_attribute_distance, disjoint_coeff, weight_coeff);
  const double conns = gene_distance(
      a.connections, b.connections, [](const ConnectionGene&) { return true; },
      connection_attribute_distance, disjoint_coeff, weight_coeff);
  return nodes + conns;
}

// ---------------------------------------------------------------------------
// serialization

json genome_to_json(const Genome& g) {
  json nodes = json::array();
  for (const auto& [_, n] : g.nodes) {
    json e{{"id", n.id}, {"kind", to_string(n.kind)}};
    if (n.kind != NodeKind::Input) {
      e["bias"] = n.bias;
      e["response"] = n.response;
      e["activation"] = to_string(n.activation);
      e["aggregation"] = to_string(n.aggregation);
    }
    nodes.push_back(std::move(e));
  }
  json conns = json::array();
  for (const auto& [_, c] : g.connections)
    conns.push_back({{"innovation", c.innovation},
                     {"source", c.source},
                     {"target", c.target},
                     {"weight", c.weight},
                     {"enabled", c.enabled}});
  json j{{"format", "swarmneat-genome"},
         {"version", kGenomeFormatVersion},
         {"id", g.id},
         {"nodes", std::move(nodes)},
         {"connections", std::move(conns)}};
  j["fitness"] = g.fitness ? json(*g.fitness) : json(nullptr);
  return j;
}

Genome genome_from_json(const json& j) {
  if (j.value("format", "") != "swarmneat-genome")
    throw std::runtime_error("not a swarmneat genome record");
  if (j.value("version", 0) != kGenomeFormatVersion)
    throw std::runtime_error("unsupported genome format version " +
                             std::to_string(j.value("version", 0)));
  Genome g;
  g.id = j.at("id");
  for (const auto& e : j.at("nodes")) {
    NodeGene n;
    n.id = e.at("id");
    n.kind = parse_kind(e.at("kind"));
    if (n.kind == NodeKind::Input) {
      n.activation = Activation::Identity;
    } else {
      n.bias = e.at("bias");
      n.response = e.at("response");
      n.activation = parse_activation(e.at("activation"));
      n.aggregation = parse_aggregation(e.at("aggregation"));
    }
    if (!g.nodes.emplace(n.id, n).second)
      throw std::runtime_error("duplicate node id " + std::to_string(n.id));
  }
  for (const auto& e : j.at("connections")) {
    ConnectionGene c;
    c.innovation = e.at("innovation");
    c.source = e.at("source");
    c.target = e.at("target");
    c.weight = e.at("weight");
    c.enabled = e.at("enabled");
    if (!g.connections.emplace(c.innovation, c).second)
      throw std::runtime_error("duplicate innovation " + std::to_string(c.innovation));
  }
  if (j.contains("fitness") && !j.at("fitness").is_null()) g.fitness = j.at("fitness").get<double>();
  try {
    g.validate();
  } catch (const std::logic_error& e) {
    throw std::runtime_error(std::string("invalid genome record: ") + e.what());
  }
  return g;
}

}  // namespace swarmneat
