#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "swarmneat/network.hpp"

using namespace swarmneat;
using swarmneat::testing::config_for;
using swarmneat::testing::random_genome;

namespace {

Genome single_link(double weight, double bias) {
  Genome g;
  g.nodes[-1] = NodeGene{-1, NodeKind::Input};
  g.nodes[0] = NodeGene{0, NodeKind::Output, bias};
  g.connections[1] = ConnectionGene{1, -1, 0, weight, true};
  return g;
}

}  // namespace

TEST_CASE("sigmoid reference values") {
  CHECK(activate(Activation::Sigmoid, 0.0) == 0.5);
  CHECK(activate(Activation::Sigmoid, 1.0) == doctest::Approx(1.0 / (1.0 + std::exp(-5.0))));
  CHECK(activate(Activation::Sigmoid, -100.0) > 0.0);
  CHECK(activate(Activation::Tanh, 0.0) == 0.0);
  CHECK(activate(Activation::Identity, 2.5) == 2.5);
}

TEST_CASE("minimal 2-in/1-out genome compiles to one layer with two terms") {
  InnovationRegistry reg(1);
  Rng rng(1);
  const auto g = new_minimal_genome(0, config_for(2, 1), reg, rng);
  const auto net = FeedForwardNetwork::compile(g);
  REQUIRE(net.layers().size() == 1);
  CHECK(net.layers()[0] == std::vector<NodeId>{0});
  REQUIRE(net.plan().size() == 1);
  CHECK(net.plan()[0].links.size() == 2);
}

TEST_CASE("single link weight 1 at input 1") {
  const auto net = FeedForwardNetwork::compile(single_link(1.0, 0.0));
  const std::vector<double> in{1.0};
  CHECK(net.activate(in)[0] == doctest::Approx(0.99331).epsilon(1e-5));
}

TEST_CASE("all-zero weights and bias give 0.5") {
  InnovationRegistry reg(2);
  Rng rng(1);
  auto g = new_minimal_genome(0, config_for(3, 2), reg, rng);
  for (auto& [_, c] : g.connections) c.weight = 0.0;
  for (auto& [_, n] : g.nodes) n.bias = 0.0;
  const auto net = FeedForwardNetwork::compile(g);
  const std::vector<double> in{0.3, -7.0, 12.0};
  for (double o : net.activate(in)) CHECK(o == 0.5);
}

TEST_CASE("zero input yields activation(bias)") {
  for (double bias : {-0.4, 0.0, 0.2, 1.1}) {
    const auto net = FeedForwardNetwork::compile(single_link(17.0, bias));
    const std::vector<double> in{0.0};
    CHECK(net.activate(in)[0] == activate(Activation::Sigmoid, bias));
  }
}

TEST_CASE("disabled only link gives activation(bias)") {
  auto g = single_link(3.0, 0.3);
  g.connections[1].enabled = false;
  const auto net = FeedForwardNetwork::compile(g);
  const std::vector<double> in{5.0};
  CHECK(net.activate(in)[0] == doctest::Approx(activate(Activation::Sigmoid, 0.3)));
  CHECK(net.plan().back().links.empty());
}

TEST_CASE("dangling hidden node is pruned") {
  auto g = single_link(0.8, 0.1);
  const auto base = FeedForwardNetwork::compile(g);
  g.nodes[5] = NodeGene{5, NodeKind::Hidden, 2.0};
  g.connections[2] = ConnectionGene{2, -1, 5, 1.5, true};
  const auto pruned = FeedForwardNetwork::compile(g);
  CHECK(pruned.plan().size() == base.plan().size());
  for (double x : {-2.0, 0.0, 0.7, 3.0}) {
    const std::vector<double> in{x};
    CHECK(pruned.activate(in) == base.activate(in));
  }
}

TEST_CASE("hidden chain is ordered by depth") {
  auto g = single_link(1.0, 0.0);
  g.connections[1].enabled = false;
  g.nodes[1] = NodeGene{1, NodeKind::Hidden};
  g.connections[2] = ConnectionGene{2, -1, 1, 1.0, true};
  g.connections[3] = ConnectionGene{3, 1, 0, 2.0, true};
  const auto net = FeedForwardNetwork::compile(g);
  REQUIRE(net.layers().size() == 2);
  CHECK(net.layers()[0] == std::vector<NodeId>{1});
  CHECK(net.layers()[1] == std::vector<NodeId>{0});
  const std::vector<double> in{0.4};
  const double h = activate(Activation::Sigmoid, 0.4);
  CHECK(net.activate(in)[0] == doctest::Approx(activate(Activation::Sigmoid, 2.0 * h)));
}

TEST_CASE("cycles are reported with node ids") {
  Genome g;
  g.nodes[-1] = NodeGene{-1, NodeKind::Input};
  g.nodes[0] = NodeGene{0, NodeKind::Output};
  g.nodes[1] = NodeGene{1, NodeKind::Hidden};
  g.nodes[2] = NodeGene{2, NodeKind::Hidden};
  g.connections[1] = ConnectionGene{1, -1, 1, 1.0, true};
  g.connections[2] = ConnectionGene{2, 1, 2, 1.0, true};
  g.connections[3] = ConnectionGene{3, 2, 1, 1.0, true};
  g.connections[4] = ConnectionGene{4, 2, 0, 1.0, true};
  try {
    FeedForwardNetwork::compile(g);
    FAIL("expected CompileError");
  } catch (const CompileError& e) {
    CHECK(e.nodes() == std::vector<NodeId>{1, 2});
  }
}

TEST_CASE("activate validates its input") {
  const auto net = FeedForwardNetwork::compile(single_link(1.0, 0.0));
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(net.activate(two), std::invalid_argument);
  const std::vector<double> nan{std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(net.activate(nan), std::invalid_argument);
  const std::vector<double> inf{std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(net.activate(inf), std::invalid_argument);
}

TEST_CASE("property: outputs are bounded, deterministic, and survive serialization") {
  const auto cfg = config_for(6, 3);
  InnovationRegistry reg(3);
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_genome(trial, cfg, reg, rng, static_cast<int>(rng.below(60)));
    const auto net = FeedForwardNetwork::compile(g);
    const auto copy = FeedForwardNetwork::compile(genome_from_json(nlohmann::json::parse(genome_to_json(g).dump())));
    for (int k = 0; k < 5; ++k) {
      std::vector<double> in(6);
      for (auto& x : in) x = rng.uniform(-5.0, 5.0);
      const auto out = net.activate(in);
      REQUIRE(out.size() == 3);
      // Large aggregates round to exactly 1.0 in double precision.
      for (double o : out) {
        CHECK(o > 0.0);
        CHECK(o <= 1.0);
      }
      CHECK(net.activate(in) == out);
      CHECK(copy.activate(in) == out);
    }
  }
}
