#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "swarmneat/genome.hpp"
#include "swarmneat/network.hpp"

using namespace swarmneat;
using swarmneat::testing::config_for;
using swarmneat::testing::random_genome;

namespace {

Genome hand_genome(int inputs, std::initializer_list<ConnectionGene> conns) {
  Genome g;
  for (int i = 1; i <= inputs; ++i) g.nodes[-i] = NodeGene{-i, NodeKind::Input};
  g.nodes[0] = NodeGene{0, NodeKind::Output};
  for (const auto& c : conns) g.connections[c.innovation] = c;
  return g;
}

std::set<Innovation> keys(const Genome& g) {
  std::set<Innovation> out;
  for (const auto& [k, _] : g.connections) out.insert(k);
  return out;
}

}  // namespace

TEST_CASE("minimal genome wiring") {
  InnovationRegistry reg(1);
  Rng rng(1);
  SUBCASE("2 inputs, 1 output") {
    const auto g = new_minimal_genome(0, config_for(2, 1), reg, rng);
    CHECK(g.num_outputs() == 1);
    CHECK(g.connections.size() == 2);
  }
  SUBCASE("16 inputs, 2 outputs") {
    InnovationRegistry r2(2);
    const auto g = new_minimal_genome(0, config_for(16, 2), r2, rng);
    CHECK(g.num_outputs() == 2);
    CHECK(g.num_inputs() == 16);
    CHECK(g.connections.size() == 32);
    for (const auto& [_, c] : g.connections) CHECK(c.enabled);
    for (const auto& [id, n] : g.nodes) CHECK(n.kind != NodeKind::Hidden);
  }
  SUBCASE("9 inputs, 2 outputs") {
    InnovationRegistry r2(2);
    CHECK(new_minimal_genome(0, config_for(9, 2), r2, rng).connections.size() == 18);
  }
  SUBCASE("non-positive dimensions are rejected") {
    CHECK_THROWS_AS(new_minimal_genome(0, config_for(0, 1), reg, rng), std::invalid_argument);
    CHECK_THROWS_AS(new_minimal_genome(0, config_for(2, 0), reg, rng), std::invalid_argument);
  }
}

TEST_CASE("add-node on a 2-input/1-output genome") {
  const auto cfg = config_for(2, 1);
  InnovationRegistry reg(1);
  Rng rng(5);
  auto g = new_minimal_genome(0, cfg, reg, rng);
  const auto before = g.connections;
  REQUIRE(mutate_add_node(g, cfg, reg, rng));
  CHECK(g.nodes.size() == 4);
  CHECK(g.connections.size() == 4);
  int disabled = 0;
  const ConnectionGene* split = nullptr;
  for (const auto& [_, c] : g.connections)
    if (!c.enabled) {
      ++disabled;
      split = &c;
    }
  CHECK(disabled == 1);
  REQUIRE(split != nullptr);
  const NodeId hidden = g.nodes.rbegin()->first;
  const auto* in = g.find_connection(split->source, hidden);
  const auto* out = g.find_connection(hidden, split->target);
  REQUIRE(in != nullptr);
  REQUIRE(out != nullptr);
  CHECK(in->weight == 1.0);
  CHECK(out->weight == before.at(split->innovation).weight);
  g.validate();
}

TEST_CASE("add-connection on a fully connected minimal genome is a no-op") {
  const auto cfg = config_for(3, 2);
  InnovationRegistry reg(2);
  Rng rng(2);
  auto g = new_minimal_genome(0, cfg, reg, rng);
  const auto copy = g;
  CHECK_FALSE(mutate_add_connection(g, cfg, reg, rng));
  CHECK(g == copy);
}

TEST_CASE("same structural mutation in one generation shares innovations") {
  const auto cfg = config_for(2, 1);
  InnovationRegistry reg(1);
  Rng rng(3);
  auto a = new_minimal_genome(0, cfg, reg, rng);
  auto b = new_minimal_genome(1, cfg, reg, rng);
  CHECK(keys(a) == keys(b));
  CHECK(reg.connection(-1, 0) == a.find_connection(-1, 0)->innovation);

  // Split the same connection in both genomes.
  const auto s1 = reg.split(-1, 0);
  const auto s2 = reg.split(-1, 0);
  CHECK(s1.node == s2.node);
  CHECK(s1.in_innovation == s2.in_innovation);
  CHECK(s1.out_innovation == s2.out_innovation);

  // A new connection between the same pair gets the same number.
  CHECK(reg.connection(-2, s1.node) == reg.connection(-2, s1.node));

  reg.start_generation();
  CHECK(reg.split(-1, 0).node != s1.node);
}

TEST_CASE("add-node in two genomes lines up") {
  const auto cfg = config_for(1, 1);
  InnovationRegistry reg(1);
  Rng rng(4);
  auto a = new_minimal_genome(0, cfg, reg, rng);
  auto b = new_minimal_genome(1, cfg, reg, rng);
  REQUIRE(mutate_add_node(a, cfg, reg, rng));
  REQUIRE(mutate_add_node(b, cfg, reg, rng));
  CHECK(keys(a) == keys(b));
  CHECK(a.nodes.rbegin()->first == b.nodes.rbegin()->first);
}

TEST_CASE("crossover examples") {
  const auto cfg = config_for(2, 1);
  InnovationRegistry reg(1);
  Rng rng(8);
  SUBCASE("self crossover is structurally identical") {
    const auto g = random_genome(0, cfg, reg, rng, 20);
    const auto c = crossover(9, g, g, cfg, rng);
    CHECK(keys(c) == keys(g));
    CHECK(c.nodes == g.nodes);
    CHECK(c.connections == g.connections);
  }
  SUBCASE("excess genes come from the fitter parent") {
    const auto fitter = hand_genome(3, {{1, -1, 0, 0.5, true}, {2, -2, 0, 0.5, true}, {3, -3, 0, 0.5, true}});
    const auto other = hand_genome(3, {{1, -1, 0, 0.1, true}, {2, -2, 0, 0.2, true}});
    const auto c = crossover(2, fitter, other, config_for(3, 1), rng);
    CHECK(keys(c) == std::set<Innovation>{1, 2, 3});
    CHECK(c.connections.at(3).weight == 0.5);
    const auto reverse = crossover(3, other, fitter, config_for(3, 1), rng);
    CHECK(keys(reverse) == std::set<Innovation>{1, 2});
  }
  SUBCASE("arity mismatch is rejected") {
    const auto a = hand_genome(2, {{1, -1, 0, 0.5, true}});
    const auto b = hand_genome(3, {{1, -1, 0, 0.5, true}});
    CHECK_THROWS_AS(crossover(4, a, b, cfg, rng), std::invalid_argument);
  }
}

TEST_CASE("mismatched enabled flags disable at the configured rate") {
  const auto cfg = config_for(1, 1);
  const auto on = hand_genome(1, {{1, -1, 0, 0.5, true}});
  const auto off = hand_genome(1, {{1, -1, 0, 0.5, false}});
  Rng rng(2024);
  const int n = 10000;
  int disabled = 0;
  for (int i = 0; i < n; ++i) {
    const auto& fitter = (i % 2 == 0) ? on : off;
    const auto& other = (i % 2 == 0) ? off : on;
    if (!crossover(i, fitter, other, cfg, rng).connections.at(1).enabled) ++disabled;
  }
  const double freq = static_cast<double>(disabled) / n;
  CHECK(std::abs(freq - 0.75) <= 0.02);
}

TEST_CASE("distance examples") {
  SUBCASE("identity") {
    InnovationRegistry reg(2);
    Rng rng(1);
    const auto g = random_genome(0, config_for(4, 2), reg, rng, 30);
    CHECK(distance(g, g, 1.0, 0.5) == 0.0);
  }
  SUBCASE("weight difference of one") {
    const auto a = hand_genome(1, {{1, -1, 0, 0.0, true}});
    const auto b = hand_genome(1, {{1, -1, 0, 1.0, true}});
    CHECK(distance(a, b, 1.0, 0.5) == doctest::Approx(0.5));
  }
  SUBCASE("one disjoint gene out of two") {
    const auto a = hand_genome(2, {{1, -1, 0, 0.3, true}});
    const auto b = hand_genome(2, {{1, -1, 0, 0.3, true}, {2, -2, 0, 0.7, true}});
    CHECK(distance(a, b, 1.0, 0.5) == doctest::Approx(0.5));
  }
  SUBCASE("enabled flag difference adds one") {
    const auto a = hand_genome(1, {{1, -1, 0, 0.2, true}});
    const auto b = hand_genome(1, {{1, -1, 0, 0.2, false}});
    CHECK(distance(a, b, 1.0, 0.5) == doctest::Approx(0.5));
  }
  SUBCASE("node bias difference") {
    auto a = hand_genome(1, {{1, -1, 0, 0.2, true}});
    auto b = a;
    b.nodes[0].bias = 2.0;
    CHECK(distance(a, b, 1.0, 0.5) == doctest::Approx(1.0));
  }
}

TEST_CASE("property: distance is symmetric, non-negative and zero on self") {
  const auto cfg = config_for(3, 2);
  InnovationRegistry reg(2);
  Rng rng(77);
  std::vector<Genome> pool;
  for (int i = 0; i < 40; ++i) pool.push_back(random_genome(i, cfg, reg, rng, static_cast<int>(rng.below(40))));
  for (const auto& a : pool) {
    CHECK(distance(a, a, cfg) == 0.0);
    for (const auto& b : pool) {
      const double d = distance(a, b, cfg);
      CHECK(d >= 0.0);
      CHECK(d == distance(b, a, cfg));
    }
  }
}

TEST_CASE("property: 100-step mutation chains stay valid and acyclic") {
  const auto cfg = config_for(4, 2);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    InnovationRegistry reg(2);
    Rng rng(seed);
    auto g = new_minimal_genome(0, cfg, reg, rng);
    for (int i = 0; i < 100; ++i) {
      mutate(g, cfg, reg, rng);
      if (i % 10 == 0) reg.start_generation();
      CHECK_NOTHROW(g.validate(true));
    }
    CHECK_NOTHROW(FeedForwardNetwork::compile(g));
  }
}

TEST_CASE("property: replaying a mutation sequence is byte-identical") {
  const auto cfg = config_for(5, 2);
  auto run = [&](std::uint64_t seed) {
    InnovationRegistry reg(2);
    Rng rng(seed);
    Genome g = random_genome(0, cfg, reg, rng, 100);
    return genome_to_json(g).dump();
  };
  for (std::uint64_t seed = 1; seed <= 10; ++seed) CHECK(run(seed) == run(seed));
  CHECK(run(1) != run(2));
}

TEST_CASE("property: crossover offspring carries exactly the fitter parent's genes") {
  const auto cfg = config_for(3, 2);
  InnovationRegistry reg(2);
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_genome(2 * i, cfg, reg, rng, static_cast<int>(rng.below(30)));
    const auto b = random_genome(2 * i + 1, cfg, reg, rng, static_cast<int>(rng.below(30)));
    const auto c = crossover(1000 + i, a, b, cfg, rng);
    CHECK(keys(c) == keys(a));
    std::set<NodeId> an, cn;
    for (const auto& [k, _] : a.nodes) an.insert(k);
    for (const auto& [k, _] : c.nodes) cn.insert(k);
    CHECK(cn == an);
    CHECK_NOTHROW(c.validate());
  }
}

TEST_CASE("weights stay inside the clamp range") {
  auto cfg = config_for(2, 1);
  cfg.weight.mutate_power = 50.0;
  InnovationRegistry reg(1);
  Rng rng(1);
  auto g = random_genome(0, cfg, reg, rng, 200);
  for (const auto& [_, c] : g.connections) {
    CHECK(c.weight <= 30.0);
    CHECK(c.weight >= -30.0);
  }
}

TEST_CASE("genome json round trip") {
  const auto cfg = config_for(3, 2);
  InnovationRegistry reg(2);
  Rng rng(6);
  auto g = random_genome(4, cfg, reg, rng, 40);
  g.fitness = 1.25;
  const auto back = genome_from_json(nlohmann::json::parse(genome_to_json(g).dump()));
  CHECK(back == g);
  g.fitness.reset();
  CHECK(genome_from_json(genome_to_json(g)) == g);

  auto bad = genome_to_json(g);
  bad["version"] = 99;
  CHECK_THROWS(genome_from_json(bad));
}

TEST_CASE("registry json round trip") {
  InnovationRegistry reg(2);
  Rng rng(1);
  random_genome(0, config_for(3, 2), reg, rng, 30);
  nlohmann::json j = reg;
  CHECK(j.get<InnovationRegistry>() == reg);
}
