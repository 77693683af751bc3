#include "lcr/harness/run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "lcr/errors.hpp"

namespace lcr::harness {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

void RunConfig::validate() const {
  if (!envs::is_known_environment(env.name)) {
    throw ConfigError("unknown environment '" + env.name + "' (expected random_goal, four_rooms, cartpole or acrobot)");
  }
  if (env.grid_size < 0) throw ConfigError("grid_size must be non-negative");
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  if (runs < 1) throw ConfigError("runs must be >= 1");
  agent.validate();
  if (lcr) lcr->validate();
}

RunConfig RunConfig::defaults_for(const std::string& env_name) {
  RunConfig c;
  c.env.name = env_name;
  if (envs::is_grid_environment(env_name)) {
    c.episodes = 5000;
    c.agent = agent::AgentConfig::grid_defaults();
  } else {
    c.episodes = 1000;
    c.agent = agent::AgentConfig::classic_control_defaults();
  }
  return c;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& field, const std::string& what) const {
    std::ostringstream msg;
    msg << source_;
    if (mark.line >= 0) msg << ":" << mark.line + 1 << ":" << mark.column + 1;
    msg << ": field '" << field << "': " << what;
    throw ConfigError(msg.str());
  }

  void require_map(const YAML::Node& node, const std::string& field) const {
    if (!node.IsMap()) fail(node.Mark(), field, "expected a mapping");
  }

  void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) const {
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first.Mark(), section + "." + key, "unknown key");
    }
  }

  template <typename T>
  void read(const YAML::Node& section, const std::string& section_name, const char* key, T& out) const {
    const YAML::Node node = section[key];
    if (!node) return;
    const std::string field = section_name + "." + key;
    if (!node.IsScalar()) fail(node.Mark(), field, "expected a scalar");
    try {
      if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!node.Scalar().empty() && node.Scalar()[0] == '-') fail(node.Mark(), field, "must be non-negative");
      }
      out = node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node.Mark(), field, "cannot parse '" + node.Scalar() + "'");
    }
  }

  void read_list(const YAML::Node& section, const std::string& section_name, const char* key,
                 std::vector<std::size_t>& out) const {
    const YAML::Node node = section[key];
    if (!node) return;
    const std::string field = section_name + "." + key;
    if (!node.IsSequence()) fail(node.Mark(), field, "expected a list");
    out.clear();
    for (const auto& item : node) {
      try {
        const auto v = item.as<long long>();
        if (v <= 0) fail(item.Mark(), field, "widths must be positive");
        out.push_back(static_cast<std::size_t>(v));
      } catch (const YAML::Exception&) {
        fail(item.Mark(), field, "cannot parse '" + item.Scalar() + "'");
      }
    }
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    r.fail(e.mark, "<document>", e.msg);
  }
  if (!root || root.IsNull()) r.fail(YAML::Mark::null_mark(), "<document>", "empty configuration");
  r.require_map(root, "<document>");
  r.check_keys(root, "", {"experiment", "agent", "lcr"});

  const YAML::Node experiment = root["experiment"];
  if (!experiment) r.fail(root.Mark(), "experiment", "missing section");
  r.require_map(experiment, "experiment");
  r.check_keys(experiment, "experiment", {"env", "grid_size", "episodes", "runs", "seed", "output_dir"});
  std::string env_name;
  if (!experiment["env"]) r.fail(experiment.Mark(), "experiment.env", "missing");
  r.read(experiment, "experiment", "env", env_name);
  if (!envs::is_known_environment(env_name)) {
    r.fail(experiment["env"].Mark(), "experiment.env",
           "unknown environment '" + env_name + "' (expected random_goal, four_rooms, cartpole or acrobot)");
  }

  RunConfig config = RunConfig::defaults_for(env_name);
  r.read(experiment, "experiment", "grid_size", config.env.grid_size);
  r.read(experiment, "experiment", "episodes", config.episodes);
  r.read(experiment, "experiment", "runs", config.runs);
  r.read(experiment, "experiment", "seed", config.seed);
  r.read(experiment, "experiment", "output_dir", config.output_dir);

  if (const YAML::Node a = root["agent"]) {
    r.require_map(a, "agent");
    r.check_keys(a, "agent",
                 {"gamma", "learning_rate", "batch_size", "start_epsilon", "stop_epsilon", "epsilon_decay",
                  "epsilon_unit", "copy_step", "copy_unit", "max_buffer_size", "min_buffer_size", "conv_channels", "encoder_hidden",
                  "head_hidden"});
    auto& ag = config.agent;
    r.read(a, "agent", "gamma", ag.gamma);
    r.read(a, "agent", "learning_rate", ag.learning_rate);
    r.read(a, "agent", "batch_size", ag.batch_size);
    r.read(a, "agent", "start_epsilon", ag.start_epsilon);
    r.read(a, "agent", "stop_epsilon", ag.stop_epsilon);
    r.read(a, "agent", "epsilon_decay", ag.epsilon_decay);
    r.read(a, "agent", "copy_step", ag.copy_step);
    auto read_unit = [&](const char* key, agent::ScheduleUnit& out) {
      if (!a[key]) return;
      std::string unit;
      r.read(a, "agent", key, unit);
      try {
        out = agent::parse_schedule_unit(unit);
      } catch (const ConfigError& e) {
        r.fail(a[key].Mark(), std::string("agent.") + key, e.what());
      }
    };
    read_unit("epsilon_unit", ag.epsilon_unit);
    read_unit("copy_unit", ag.copy_unit);
    r.read(a, "agent", "max_buffer_size", ag.max_buffer_size);
    r.read(a, "agent", "min_buffer_size", ag.min_buffer_size);
    r.read_list(a, "agent", "conv_channels", ag.conv_channels);
    r.read_list(a, "agent", "encoder_hidden", ag.encoder_hidden);
    r.read_list(a, "agent", "head_hidden", ag.head_hidden);
  }

  if (const YAML::Node l = root["lcr"]) {
    if (!l.IsNull()) {
      r.require_map(l, "lcr");
      r.check_keys(l, "lcr", {"k", "batch_size", "gradient_steps", "learning_rate", "reuse_w", "train_encoder"});
      auxiliary::LcrConfig lc;
      r.read(l, "lcr", "k", lc.k);
      r.read(l, "lcr", "batch_size", lc.batch_size);
      r.read(l, "lcr", "gradient_steps", lc.gradient_steps);
      r.read(l, "lcr", "learning_rate", lc.learning_rate);
      r.read(l, "lcr", "reuse_w", lc.reuse_w);
      r.read(l, "lcr", "train_encoder", lc.train_encoder);
      config.lcr = lc;
    }
  }

  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.string());
}

std::string to_yaml(const RunConfig& c) {
  auto list = [](const std::vector<std::size_t>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s + "]";
  };
  std::ostringstream out;
  out << "experiment:\n"
      << "  env: " << c.env.name << "\n"
      << "  grid_size: " << c.env.grid_size << "\n"
      << "  episodes: " << c.episodes << "\n"
      << "  runs: " << c.runs << "\n"
      << "  seed: " << c.seed << "\n"
      << "  output_dir: " << YAML::Dump(YAML::Node(c.output_dir)) << "\n";
  const auto& a = c.agent;
  out << "agent:\n"
      << "  gamma: " << format_double(a.gamma) << "\n"
      << "  learning_rate: " << format_double(a.learning_rate) << "\n"
      << "  batch_size: " << a.batch_size << "\n"
      << "  start_epsilon: " << format_double(a.start_epsilon) << "\n"
      << "  stop_epsilon: " << format_double(a.stop_epsilon) << "\n"
      << "  epsilon_decay: " << format_double(a.epsilon_decay) << "\n"
      << "  epsilon_unit: " << agent::to_string(a.epsilon_unit) << "\n"
      << "  copy_step: " << a.copy_step << "\n"
      << "  copy_unit: " << agent::to_string(a.copy_unit) << "\n"
      << "  max_buffer_size: " << a.max_buffer_size << "\n"
      << "  min_buffer_size: " << a.min_buffer_size << "\n"
      << "  conv_channels: " << list(a.conv_channels) << "\n"
      << "  encoder_hidden: " << list(a.encoder_hidden) << "\n"
      << "  head_hidden: " << list(a.head_hidden) << "\n";
  if (c.lcr) {
    const auto& l = *c.lcr;
    out << "lcr:\n"
        << "  k: " << l.k << "\n"
        << "  batch_size: " << l.batch_size << "\n"
        << "  gradient_steps: " << l.gradient_steps << "\n"
        << "  learning_rate: " << format_double(l.learning_rate) << "\n"
        << "  reuse_w: " << (l.reuse_w ? "true" : "false") << "\n"
        << "  train_encoder: " << (l.train_encoder ? "true" : "false") << "\n";
  }
  return out.str();
}

}  // namespace lcr::harness
