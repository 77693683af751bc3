#include "lcr/harness/experiment.hpp"

#include <atomic>
#include <exception>
#include <ostream>
#include <thread>

#include "lcr/errors.hpp"
#include "lcr/harness/checkpoint.hpp"

namespace lcr::harness {

RunStreams run_streams(std::uint64_t master_seed, int run_id) {
  const std::uint64_t seed = master_seed + static_cast<std::uint64_t>(run_id);
  return {mix_seed(seed, 0), mix_seed(seed, 1), mix_seed(seed, 2)};
}

RunSummary run_single(const RunConfig& config, int run_id, const std::function<void(const MetricsRow&)>& sink,
                      const RunHooks& hooks, const std::filesystem::path& model_path) {
  config.validate();
  const RunStreams streams = run_streams(config.seed, run_id);
  Rng env_rng(streams.env);
  Rng agent_rng(streams.agent);
  Rng lcr_rng(streams.lcr);

  auto env = envs::make_environment(config.env);
  const auto spec =
      agent::network_spec_for(config.agent, env->observation_shape(), static_cast<std::size_t>(env->num_actions()));
  agent::DqnAgent learner(config.agent, spec, agent_rng);
  replay::ReplayBuffer buffer(config.agent.max_buffer_size, config.agent.min_buffer_size);

  std::optional<auxiliary::LocalConstraint> constraint;
  if (config.lcr) {
    constraint.emplace(*config.lcr);
    if (hooks.on_lcr_created) hooks.on_lcr_created(run_id, *constraint);
  }

  RunSummary summary;
  std::uint64_t t = 0;
  const bool copy_by_steps = config.agent.copy_unit == agent::ScheduleUnit::steps;
  const auto copy_step = static_cast<std::uint64_t>(config.agent.copy_step);

  for (int episode = 0; episode < config.episodes; ++episode) {
    MetricsRow row;
    row.run_id = run_id;
    row.seed = config.seed + static_cast<std::uint64_t>(run_id);
    row.episode = episode;
    const bool per_step_epsilon = config.agent.epsilon_unit == agent::ScheduleUnit::steps;
    row.epsilon = agent::epsilon_schedule(config.agent, per_step_epsilon ? static_cast<long>(t) : episode);

    double td_sum = 0.0;
    long td_count = 0;
    envs::Observation obs = env->reset(env_rng);
    for (std::uint64_t step_index = 0;; ++step_index) {
      const double epsilon =
          per_step_epsilon ? agent::epsilon_schedule(config.agent, static_cast<long>(t)) : row.epsilon;
      const int action = learner.act(obs, epsilon, agent_rng);
      envs::StepResult result = env->step(action);
      row.episode_return += result.reward;
      const bool done = result.done();
      buffer.push({std::move(obs), action, result.reward, result.observation, result.terminated,
                   static_cast<std::uint64_t>(episode), step_index});
      obs = std::move(result.observation);
      ++t;

      if (auto loss = learner.train_step(buffer, agent_rng)) {
        td_sum += *loss;
        ++td_count;
      }
      if (copy_by_steps && t % copy_step == 0) learner.sync_target();
      if (constraint && auxiliary::should_trigger(t, config.lcr->batch_size)) {
        if (auto update = constraint->update(learner.online(), buffer, lcr_rng)) {
          ++summary.lcr_updates;
          row.lcr_loss_first = update->first_loss;
          row.lcr_loss_last = update->last_loss;
        } else {
          ++summary.lcr_skipped;
        }
      }
      if (done) break;
    }
    if (!copy_by_steps && (episode + 1) % config.agent.copy_step == 0) learner.sync_target();

    row.total_env_steps = t;
    if (td_count > 0) row.mean_td_loss = td_sum / static_cast<double>(td_count);
    sink(row);
    if (hooks.on_episode) hooks.on_episode(row);
  }
  summary.total_env_steps = t;
  if (!model_path.empty()) save_checkpoint(model_path, learner.online().parameters());
  if (hooks.on_run_finished) hooks.on_run_finished(run_id, learner);
  return summary;
}

std::filesystem::path run_experiment(const RunConfig& config, const ExperimentOptions& options) {
  config.validate();
  const std::filesystem::path dir = config.output_dir;
  std::filesystem::create_directories(dir);
  {
    std::ofstream snapshot(dir / "config.yaml", std::ios::trunc);
    snapshot << to_yaml(config);
  }
  const auto metrics_path = dir / "metrics.csv";
  MetricsWriter writer(metrics_path, 0);

  auto execute = [&](int run_id) {
    const auto model = options.save_models ? dir / ("model_run" + std::to_string(run_id) + ".bin")
                                           : std::filesystem::path{};
    run_single(config, run_id, [&](const MetricsRow& row) { writer.append(row); }, options.hooks, model);
    writer.finish_run(run_id);
  };

  const int workers = std::clamp(options.jobs, 1, config.runs);
  if (workers == 1) {
    for (int r = 0; r < config.runs; ++r) execute(r);
    return metrics_path;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int r = next++; r < config.runs; r = next++) {
        try {
          execute(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = config.runs;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return metrics_path;
}

std::vector<std::string> sweepable_parameters() {
  return {"gradient_steps", "K", "lcr_learning_rate", "lcr_batch_size"};
}

namespace {
long long parse_integer(const std::string& parameter, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || v <= 0) {
    throw ConfigError("sweep value '" + value + "' for " + parameter + " must be a positive integer");
  }
  return v;
}
}  // namespace

RunConfig with_sweep_value(const RunConfig& base, const std::string& parameter, const std::string& value) {
  RunConfig config = base;
  auxiliary::LcrConfig lcr = base.lcr.value_or(auxiliary::LcrConfig{});
  if (parameter == "gradient_steps") {
    lcr.gradient_steps = static_cast<int>(parse_integer(parameter, value));
  } else if (parameter == "K" || parameter == "k") {
    lcr.k = static_cast<std::size_t>(parse_integer(parameter, value));
  } else if (parameter == "lcr_batch_size") {
    lcr.batch_size = static_cast<std::size_t>(parse_integer(parameter, value));
  } else if (parameter == "lcr_learning_rate") {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size()) throw ConfigError("sweep value '" + value + "' for " + parameter + " is not a number");
    lcr.learning_rate = v;
  } else {
    throw ConfigError("unknown sweep parameter '" + parameter +
                      "' (expected gradient_steps, K, lcr_learning_rate or lcr_batch_size)");
  }
  lcr.validate();
  config.lcr = lcr;
  config.output_dir = (std::filesystem::path(base.output_dir) / (parameter + "_" + value)).string();
  return config;
}

std::vector<std::filesystem::path> run_sweep(const RunConfig& base, const std::string& parameter,
                                             const std::vector<std::string>& values,
                                             const ExperimentOptions& options) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<RunConfig> configs;
  for (const auto& v : values) configs.push_back(with_sweep_value(base, parameter, v));
  std::vector<std::filesystem::path> out;
  for (const auto& c : configs) out.push_back(run_experiment(c, options));
  return out;
}

void dump_representations(agent::QNetwork& network, const envs::EnvConfig& env_config, int trajectories,
                          std::uint64_t seed, std::ostream& out) {
  if (trajectories < 1) throw ConfigError("need at least one trajectory");
  auto env = envs::make_environment(env_config);
  Rng env_rng(mix_seed(seed, 0));
  Rng policy_rng(mix_seed(seed, 1));
  const int actions = env->num_actions();

  out << "trajectory_id,step";
  for (std::size_t d = 0; d < network.representation_dim(); ++d) out << ",phi_" << d;
  out << '\n';
  for (int traj = 0; traj < trajectories; ++traj) {
    envs::Observation obs = env->reset(env_rng);
    for (int step = 0;; ++step) {
      const numerics::Tensor phi = network.represent(agent::as_batch(obs));
      out << traj << ',' << step;
      for (double v : phi.data()) out << ',' << format_double(v);
      out << '\n';
      envs::StepResult result = env->step(uniform_int(policy_rng, 0, actions - 1));
      if (result.done()) break;
      obs = std::move(result.observation);
    }
  }
  if (!out) throw std::runtime_error("failed writing representation dump");
}

}  // namespace lcr::harness
