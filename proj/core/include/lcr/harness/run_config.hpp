#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "lcr/agent/dqn_agent.hpp"
#include "lcr/auxiliary/local_constraint.hpp"
#include "lcr/envs/environment.hpp"

namespace lcr::harness {

// Everything needed to reproduce one experiment. An absent `lcr` block means plain DQN.
struct RunConfig {
  envs::EnvConfig env;
  int episodes = 5000;
  int runs = 10;
  std::uint64_t seed = 0;
  std::string output_dir = "runs";
  agent::AgentConfig agent;
  std::optional<auxiliary::LcrConfig> lcr;

  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  // Defaults for an environment: grid tasks and classic control use different DQN
  // hyperparameters (batch size, buffer sizes, target copy cadence, network widths).
  static RunConfig defaults_for(const std::string& env_name);
};

// Parses the YAML experiment format. Errors are ConfigError messages that name the
// source, the line and the offending field.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical YAML rendering; parse_run_config(to_yaml(c)) == c.
std::string to_yaml(const RunConfig& config);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace lcr::harness
