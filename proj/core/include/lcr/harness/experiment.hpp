#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lcr/harness/metrics.hpp"
#include "lcr/harness/run_config.hpp"

namespace lcr::harness {

// Instrumentation points for tests and tooling; all optional.
struct RunHooks {
  // Called once per run right after the constraint is created (never for baselines).
  std::function<void(int run_id, auxiliary::LocalConstraint&)> on_lcr_created;
  std::function<void(const MetricsRow&)> on_episode;
  // Called with the trained agent at the end of each run.
  std::function<void(int run_id, agent::DqnAgent&)> on_run_finished;
};

struct ExperimentOptions {
  int jobs = 1;              // runs executed concurrently
  bool save_models = true;   // write model_run<r>.bin next to the metrics file
  RunHooks hooks;
};

struct RunStreams {
  std::uint64_t env;
  std::uint64_t agent;
  std::uint64_t lcr;
};

// Seeds of the environment, agent and constraint RNG streams for one run. They are
// fixed offsets of seed + run_id, so enabling the constraint leaves the other two alone.
RunStreams run_streams(std::uint64_t master_seed, int run_id);

struct RunSummary {
  long lcr_updates = 0;
  long lcr_skipped = 0;
  std::uint64_t total_env_steps = 0;
};

// Executes one seeded run, reporting each episode through `sink`.
RunSummary run_single(const RunConfig& config, int run_id, const std::function<void(const MetricsRow&)>& sink,
                      const RunHooks& hooks = {}, const std::filesystem::path& model_path = {});

// Runs every configured seed and writes <output_dir>/metrics.csv; returns its path.
std::filesystem::path run_experiment(const RunConfig& config, const ExperimentOptions& options = {});

// Parameters accepted by run_sweep.
std::vector<std::string> sweepable_parameters();

// Copy of `base` with one constraint hyperparameter replaced. Throws ConfigError for
// unknown names or values of the wrong type.
RunConfig with_sweep_value(const RunConfig& base, const std::string& parameter, const std::string& value);

// One experiment per value, each under <output_dir>/<parameter>_<value>/.
std::vector<std::filesystem::path> run_sweep(const RunConfig& base, const std::string& parameter,
                                             const std::vector<std::string>& values,
                                             const ExperimentOptions& options = {});

// Rolls out uniformly random trajectories (actions and resets driven only by `seed`)
// and writes trajectory_id,step,phi_0..phi_{D-1} for every visited state.
void dump_representations(agent::QNetwork& network, const envs::EnvConfig& env, int trajectories,
                          std::uint64_t seed, std::ostream& out);

}  // namespace lcr::harness
