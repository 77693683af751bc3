// Command line driver: train, sweep and dump-repr.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lcr/agent/dqn_agent.hpp"
#include "lcr/errors.hpp"
#include "lcr/harness/checkpoint.hpp"
#include "lcr/harness/experiment.hpp"
#include "lcr/harness/run_config.hpp"

namespace {

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DQN with locally constrained representations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;

  auto* train = app.add_subcommand("train", "Run every seed of an experiment and write metrics.csv");
  train->add_option("--config", config_path, "Experiment YAML file")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_dir, "Output directory (overrides experiment.output_dir)");
  auto* train_seed = train->add_option("--seed", seed, "Master seed override");
  train->add_option("--jobs", jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);

  std::string param;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "Repeat an experiment for each value of one constraint hyperparameter");
  sweep->add_option("--config", config_path, "Base experiment YAML file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--param", param, "gradient_steps | K | lcr_learning_rate | lcr_batch_size")->required();
  sweep->add_option("--values", values, "Comma separated values, e.g. 2,6,10,20")->required();
  sweep->add_option("--out", out_dir, "Root directory for the per-value outputs");
  auto* sweep_seed = sweep->add_option("--seed", seed, "Master seed override");
  sweep->add_option("--jobs", jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);

  std::string model_path;
  std::string dump_path;
  int trajectories = 20;
  auto* dump = app.add_subcommand("dump-repr", "Write encoder representations along random-policy trajectories");
  dump->add_option("--config", config_path, "Experiment YAML file (selects env and architecture)")
      ->required()
      ->check(CLI::ExistingFile);
  dump->add_option("--model", model_path, "Checkpoint written by train")->required()->check(CLI::ExistingFile);
  dump->add_option("--trajectories", trajectories, "Number of trajectories")->check(CLI::PositiveNumber);
  dump->add_option("--out", dump_path, "CSV path (default: stdout)");
  auto* dump_seed = dump->add_option("--seed", seed, "Seed of the random policy and resets");

  CLI11_PARSE(app, argc, argv);

  try {
    lcr::harness::RunConfig config = lcr::harness::load_run_config(config_path);
    auto seed_set = [&](CLI::Option* opt) { return opt->count() > 0; };
    lcr::harness::ExperimentOptions options;
    options.jobs = jobs;

    if (train->parsed()) {
      if (seed_set(train_seed)) config.seed = seed;
      if (!out_dir.empty()) config.output_dir = out_dir;
      const auto path = lcr::harness::run_experiment(config, options);
      std::cout << path.string() << '\n';
    } else if (sweep->parsed()) {
      if (seed_set(sweep_seed)) config.seed = seed;
      if (!out_dir.empty()) config.output_dir = out_dir;
      for (const auto& path : lcr::harness::run_sweep(config, param, split_values(values), options)) {
        std::cout << path.string() << '\n';
      }
    } else if (dump->parsed()) {
      if (seed_set(dump_seed)) config.seed = seed;
      auto env = lcr::envs::make_environment(config.env);
      const auto spec = lcr::agent::network_spec_for(config.agent, env->observation_shape(),
                                                     static_cast<std::size_t>(env->num_actions()));
      lcr::Rng init(0);
      lcr::agent::QNetwork network(spec, init);
      lcr::harness::load_checkpoint(model_path, network.parameters());
      if (dump_path.empty()) {
        lcr::harness::dump_representations(network, config.env, trajectories, config.seed, std::cout);
      } else {
        std::ofstream out(dump_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + dump_path + "'");
        lcr::harness::dump_representations(network, config.env, trajectories, config.seed, out);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "lcr: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
