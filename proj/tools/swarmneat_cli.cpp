#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmneat/runner.hpp"
#include "swarmneat/svg.hpp"

using namespace swarmneat;

namespace {

struct Common {
  std::string config_path;
  std::string task;
  std::optional<std::uint64_t> seed;
  std::optional<int> generations;
  std::optional<int> parallelism;
  std::string out;
};

RunConfig resolve_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_run_config(c.config_path);
  if (!c.task.empty()) cfg.task = c.task;
  if (c.seed) cfg.seed = *c.seed;
  if (c.generations) cfg.generations = *c.generations;
  if (c.parallelism) cfg.parallelism = *c.parallelism;
  if (!c.out.empty()) cfg.out_dir = c.out;
  return cfg;
}

void add_common(CLI::App* app, Common& c, bool with_out_dir) {
  app->add_option("--config", c.config_path, "Run config file (JSON)")->check(CLI::ExistingFile);
  app->add_option("--task", c.task, "Task name")
      ->check(CLI::IsMember(task_names()));
  app->add_option("--seed", c.seed, "Global seed");
  app->add_option("--parallelism", c.parallelism, "Worker threads (0 = all cores)");
  if (with_out_dir) app->add_option("--out", c.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolve and evaluate swarm controllers with NEAT"};
  app.require_subcommand(1);

  Common train_opts;
  auto* train_cmd = app.add_subcommand("train", "Evolve a controller for a task");
  add_common(train_cmd, train_opts, true);
  train_cmd->add_option("--generations", train_opts.generations, "Number of generations");

  Common resume_opts;
  auto* resume_cmd = app.add_subcommand("resume", "Continue training from <out>/checkpoint-latest.json");
  resume_cmd->add_option("--out", resume_opts.out, "Run directory")->required();
  resume_cmd->add_option("--generations", resume_opts.generations, "Total number of generations");
  resume_cmd->add_option("--parallelism", resume_opts.parallelism, "Worker threads (0 = all cores)");

  Common compare_opts;
  int trials = 60;
  std::vector<std::string> policies;
  std::string compare_json;
  auto* compare_cmd = app.add_subcommand("compare", "Run policies over paired trials and Welch-test them");
  add_common(compare_cmd, compare_opts, false);
  compare_cmd->add_option("--policy", policies, "Genome file or 'designed' (repeatable)")->required();
  compare_cmd->add_option("--trials", trials, "Trials per policy")->check(CLI::Range(2, 1000000));
  compare_cmd->add_option("--out", compare_json, "Write the report as JSON");

  Common replay_opts;
  std::string replay_policy;
  std::string replay_svg;
  auto* replay_cmd = app.add_subcommand("replay", "Run one logged episode");
  add_common(replay_cmd, replay_opts, false);
  replay_cmd->add_option("--policy", replay_policy, "Genome file or 'designed'")->required();
  replay_cmd->add_option("--out", replay_opts.out, "Trajectory CSV path")->required();
  replay_cmd->add_option("--svg", replay_svg, "Also render the trajectory to this SVG");

  std::string render_in, render_out;
  auto* render_cmd = app.add_subcommand("render", "Draw a trajectory table as SVG");
  render_cmd->add_option("input", render_in, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--out", render_out, "SVG path")->required();

  std::string plot_in, plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Plot an evolution CSV as SVG");
  plot_cmd->add_option("input", plot_in, "Evolution CSV")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", plot_out, "SVG path")->required();

  Common print_opts;
  auto* print_cmd = app.add_subcommand("print-config", "Print the effective run config with all defaults");
  print_cmd->add_option("--config", print_opts.config_path, "Run config file")->check(CLI::ExistingFile);
  print_cmd->add_option("--task", print_opts.task, "Task name")->check(CLI::IsMember(task_names()));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      const RunConfig cfg = resolve_config(train_opts);
      const auto result = train(cfg, false, &std::cout);
      std::cout << "wrote " << result.csv_path.string() << " and " << result.best_genome_path.string()
                << '\n';
    } else if (*resume_cmd) {
      RunConfig cfg;
      cfg.out_dir = resume_opts.out;
      const auto cp = nlohmann::json::parse(read_file(std::filesystem::path(cfg.out_dir) / "checkpoint-latest.json"));
      cfg = cp.at("run_config").get<RunConfig>();
      cfg.out_dir = resume_opts.out;
      if (resume_opts.generations) cfg.generations = *resume_opts.generations;
      if (resume_opts.parallelism) cfg.parallelism = *resume_opts.parallelism;
      const auto result = train(cfg, true, &std::cout);
      std::cout << "wrote " << result.csv_path.string() << " and " << result.best_genome_path.string()
                << '\n';
    } else if (*compare_cmd) {
      const RunConfig cfg = resolve_config(compare_opts);
      const auto report = compare(policies, cfg.make_task(), trials, cfg.seed, cfg.parallelism);
      std::cout << format_comparison(report);
      if (!compare_json.empty()) write_file(compare_json, to_json(report).dump(1));
    } else if (*replay_cmd) {
      const RunConfig cfg = resolve_config(replay_opts);
      const TaskSpec task = cfg.make_task();
      const auto result = replay(replay_policy, task, replay_opts.seed);
      write_file(replay_opts.out, trajectory_csv(task, result.episode));
      std::cout << "fitness " << format_double(result.episode.fitness) << " (seed " << result.seed << ")\n";
      if (!replay_svg.empty())
        write_file(replay_svg, render_trajectory_svg(parse_trajectory_csv(read_file(replay_opts.out))));
    } else if (*render_cmd) {
      write_file(render_out, render_trajectory_svg(parse_trajectory_csv(read_file(render_in))));
    } else if (*plot_cmd) {
      write_file(plot_out, plot_evolution_svg(parse_evolution_csv(read_file(plot_in))));
    } else if (*print_cmd) {
      RunConfig cfg = resolve_config(print_opts);
      nlohmann::json j = cfg;
      j["neat"] = cfg.neat_for_task();
      j["task_defaults"] = cfg.make_task();
      std::cout << j.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
