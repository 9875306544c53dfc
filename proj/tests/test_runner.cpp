#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <regex>

#include "swarmneat/network.hpp"
#include "swarmneat/runner.hpp"
#include "swarmneat/svg.hpp"

using namespace swarmneat;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "swarmneat-tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig tiny_config(const fs::path& out) {
  RunConfig c;
  c.task = "wall_climb_neighbor";
  c.task_overrides = {{"n_agents", 4}, {"duration", 4.0}};
  c.neat.pop_size = 12;
  c.generations = 4;
  c.seed = 11;
  c.checkpoint_interval = 2;
  c.out_dir = out.string();
  return c;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("seed derivation is stable and purpose-separated") {
  CHECK(episode_seed(1, 0, 5) == episode_seed(1, 0, 5));
  CHECK(episode_seed(1, 0, 5) != episode_seed(1, 1, 5));
  CHECK(episode_seed(1, 0, 5) != episode_seed(2, 0, 5));
  CHECK(episode_seed(1, 0, 5) != trial_seed(1, 5));
  CHECK(episode_seed(1, 0, 5) == derive_seed({1, kEpisodeSeedTag, 0, 5}));
}

TEST_CASE("parallel_for covers every job once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 8, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 4, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("evaluate_generation") {
  const RunConfig cfg = tiny_config(scratch("eval"));
  const TaskSpec task = cfg.make_task();
  Population pop(cfg.neat_for_task(), 3);
  const auto& genomes = pop.genomes();

  const auto serial = evaluate_generation(genomes, task, 0, 7, 1);
  const auto parallel = evaluate_generation(genomes, task, 0, 7, 8);
  CHECK(serial == parallel);
  CHECK(serial.size() == genomes.size());
  CHECK(evaluate_generation(genomes, task, 1, 7, 2) != serial);

  const auto& [id, g] = *genomes.begin();
  const NetworkPolicy policy(FeedForwardNetwork::compile(g), task.mode, task.sim);
  CHECK(run_episode(task, policy, episode_seed(7, 0, id)).fitness == serial.at(id));

  SUBCASE("a genome that does not fit the task scores -inf") {
    auto broken = genomes;
    InnovationRegistry reg(2);
    Rng rng(1);
    GenomeConfig wrong = cfg.neat_for_task().genome;
    wrong.num_inputs = 3;
    broken[id] = new_minimal_genome(id, wrong, reg, rng);
    const auto f = evaluate_generation(broken, task, 0, 7, 2);
    CHECK(f.at(id) == -std::numeric_limits<double>::infinity());
  }
}

TEST_CASE("training is deterministic and independent of parallelism") {
  RunConfig a = tiny_config(scratch("det-a"));
  RunConfig b = tiny_config(scratch("det-b"));
  b.parallelism = 8;
  const auto ra = train(a);
  const auto rb = train(b);
  CHECK(read_file(ra.csv_path) == read_file(rb.csv_path));
  CHECK(read_file(ra.best_genome_path) != "");
  CHECK(ra.report.records.size() == 4);
  CHECK(parse_evolution_csv(read_file(ra.csv_path)) == ra.report);

  RunConfig c = tiny_config(scratch("det-c"));
  c.seed = 12;
  CHECK(read_file(train(c).csv_path) != read_file(ra.csv_path));
}

TEST_CASE("resume reproduces an uninterrupted run") {
  RunConfig straight = tiny_config(scratch("resume-straight"));
  straight.generations = 6;
  const auto full = train(straight);

  RunConfig part = tiny_config(scratch("resume-part"));
  part.generations = 2;
  train(part);
  CHECK(fs::exists(fs::path(part.out_dir) / "checkpoint-2.json"));
  part.generations = 6;
  const auto resumed = train(part, true);

  CHECK(read_file(resumed.csv_path) == read_file(full.csv_path));
  CHECK(resumed.best_genome == full.best_genome);
  CHECK(read_file(resumed.best_genome_path) == read_file(full.best_genome_path));
}

TEST_CASE("replay of the trained best genome reproduces its training fitness") {
  const RunConfig cfg = tiny_config(scratch("replay"));
  const auto trained = train(cfg);
  const TaskSpec task = cfg.make_task();
  const auto r = replay(trained.best_genome_path.string(), task, std::nullopt);
  CHECK(r.episode.fitness == *trained.best_genome.fitness);
  CHECK(r.episode.fitness == trained.report.records.back().best);
  CHECK_FALSE(r.episode.trajectory.empty());

  SUBCASE("mismatched task is an arity error") {
    CHECK_THROWS_AS(replay(trained.best_genome_path.string(), make_task("gtmab_area"), 1), ArityError);
  }
  SUBCASE("designed policy on the default wall climb clears the wall") {
    CHECK(replay("designed", make_task("wall_climb_neighbor"), 1).episode.fitness > 0.0);
  }
}

TEST_CASE("compare") {
  const TaskSpec task = make_task("anki_area", {{"duration", 5.0}});
  SUBCASE("identical policies give t = 0, p = 1") {
    const auto r = compare({"designed", "designed"}, task, 5, 3, 2);
    REQUIRE(r.policies.size() == 2);
    CHECK(r.policies[0].fitness == r.policies[1].fitness);
    REQUIRE(r.tests.size() == 1);
    CHECK(r.tests[0].welch.t == 0.0);
    CHECK(r.tests[0].welch.p == 1.0);
    CHECK(compare({"designed"}, task, 5, 3, 1).policies[0].fitness == r.policies[0].fitness);
  }
  SUBCASE("separated summaries") {
    const auto w = welch_t_test({10, 1, 60}, {0, 1, 60});
    CHECK(w.t == doctest::Approx(54.77).epsilon(1e-3));
    CHECK(w.p < 1e-6);
  }
  SUBCASE("trials must be at least 2") {
    CHECK_THROWS(compare({"designed"}, task, 1, 3, 1));
  }
  SUBCASE("unreadable policy") {
    CHECK_THROWS(compare({"/nonexistent/genome.json"}, task, 3, 3, 1));
  }
  SUBCASE("report serializes") {
    const auto r = compare({"designed"}, task, 3, 3, 1);
    const auto j = to_json(r);
    CHECK(j.at("policies").size() == 1);
    CHECK(format_comparison(r).find("designed") != std::string::npos);
  }
}

TEST_CASE("trajectory table round trip and rendering") {
  const TaskSpec task = make_task("wall_climb_neighbor");
  const auto r = replay("designed", task, 2);
  const std::string csv = trajectory_csv(task, r.episode);
  const auto log = parse_trajectory_csv(csv);
  REQUIRE(log.fitness.has_value());
  CHECK(*log.fitness == r.episode.fitness);
  CHECK(log.rows.size() == r.episode.trajectory.size());
  CHECK(log.arena.wall.has_value());
  CHECK(log.rows.back().x == r.episode.trajectory.back().x);

  const std::string svg = render_trajectory_svg(log);
  CHECK(count(svg, "class=\"path\"") == 20);
  CHECK(count(svg, "class=\"terminal\"") == 20);
  CHECK(count(svg, "class=\"wall\"") == 1);
  // Terminal markers on both sides of the wall when anyone made it.
  REQUIRE(r.episode.fitness > 0);
  int left = 0, right = 0;
  for (const auto& a : r.episode.final_state.agents) (a.x < 0 ? left : right)++;
  CHECK(left == static_cast<int>(r.episode.fitness));
  CHECK(left > 0);
  CHECK(right >= 0);

  TrajectoryLog empty;
  empty.arena = task.arena;
  const std::string arena_only = render_trajectory_svg(empty);
  CHECK(count(arena_only, "class=\"arena\"") == 1);
  CHECK(count(arena_only, "class=\"path\"") == 0);

  CHECK_THROWS(parse_trajectory_csv("time,agent\n1,2\n"));
}

TEST_CASE("evolution plot has one point per generation and series") {
  EvolutionReport rep;
  for (int g = 0; g < 50; ++g) rep.records.push_back({g, g * 0.1, g * 0.05, 0.2, 3, g + 1});
  const std::string svg = plot_evolution_svg(parse_evolution_csv(evolution_csv(rep)));
  CHECK(count(svg, "class=\"best-point\"") == 50);
  CHECK(count(svg, "class=\"mean-point\"") == 50);
  CHECK_THROWS(parse_evolution_csv("generation,best\n"));
  CHECK_THROWS(parse_evolution_csv(evolution_csv(rep) + "1,2,x,4,5,6\n"));
}

TEST_CASE("run config files") {
  const fs::path dir = scratch("config");
  write_file(dir / "run.json", R"({"task": "anki_area", "generations": 7, "neat": {"pop_size": 20},
                                 "task_overrides": {"n_agents": 6}})");
  const RunConfig c = load_run_config(dir / "run.json");
  CHECK(c.task == "anki_area");
  CHECK(c.generations == 7);
  CHECK(c.neat.pop_size == 20);
  CHECK(c.neat.max_stagnation == 15);
  CHECK(c.make_task().n_agents == 6);
  CHECK(c.neat_for_task().genome.num_inputs == 9);
  write_file(dir / "bad.json", R"({"task": "nope"})");
  CHECK_THROWS(load_run_config(dir / "bad.json"));
  nlohmann::json j = c;
  CHECK(j.get<RunConfig>().generations == 7);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-12, 16.0, 2.718473401330013}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("command line tool") {
  const char* cli = std::getenv("SWARMNEAT_CLI");
  if (!cli) return;
  const fs::path dir = scratch("cli");
  const std::string base = std::string(cli);
  auto run = [&](const std::string& args) {
    return std::system((base + " " + args + " > " + (dir / "stdout.txt").string() + " 2>&1").c_str());
  };
  CHECK(run("print-config --task gtmab_area") == 0);
  CHECK(read_file(dir / "stdout.txt").find("\"num_inputs\": 16") != std::string::npos);

  nlohmann::json cfg = tiny_config(dir / "ignored");
  write_file(dir / "run.json", cfg.dump());
  const std::string out = (dir / "run").string();
  CHECK(run("train --config " + (dir / "run.json").string() + " --out " + out) == 0);
  CHECK(parse_evolution_csv(read_file(fs::path(out) / "evolution.csv")).records.size() == 4);
  CHECK(run("resume --out " + out + " --generations 5") == 0);
  CHECK(parse_evolution_csv(read_file(fs::path(out) / "evolution.csv")).records.size() == 5);

  const std::string genome = (fs::path(out) / "best_genome.json").string();
  CHECK(run("compare --config " + (dir / "run.json").string() + " --policy designed --policy " + genome +
            " --trials 3 --out " + (dir / "cmp.json").string()) == 0);
  CHECK(fs::exists(dir / "cmp.json"));
  CHECK(run("replay --config " + (dir / "run.json").string() + " --policy " + genome + " --out " +
            (dir / "traj.csv").string()) == 0);
  CHECK(run("render " + (dir / "traj.csv").string() + " --out " + (dir / "traj.svg").string()) == 0);
  CHECK(run("plot " + out + "/evolution.csv --out " + (dir / "evo.svg").string()) == 0);
  CHECK(fs::file_size(dir / "traj.svg") > 0);
  CHECK(fs::file_size(dir / "evo.svg") > 0);

  CHECK(run("replay --task gtmab_area --policy " + genome + " --out " + (dir / "x.csv").string()) != 0);
  CHECK(read_file(dir / "stdout.txt").find("error:") != std::string::npos);
  CHECK(run("train --task no_such_task") != 0);
}
