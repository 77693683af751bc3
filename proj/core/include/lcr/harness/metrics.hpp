#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace lcr::harness {

// One line of the per-episode metrics CSV. Optional fields are written as empty cells.
struct MetricsRow {
  int run_id = 0;
  std::uint64_t seed = 0;
  int episode = 0;
  std::uint64_t total_env_steps = 0;
  double episode_return = 0.0;
  double epsilon = 0.0;
  std::optional<double> mean_td_loss;
  std::optional<double> lcr_loss_first;
  std::optional<double> lcr_loss_last;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr const char* metrics_header =
    "run_id,seed,episode,total_env_steps,episode_return,epsilon,mean_td_loss,lcr_loss_first,lcr_loss_last";

std::string format_metrics_row(const MetricsRow& row);
MetricsRow parse_metrics_row(const std::string& line);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

// Appends rows to a CSV in run order, flushing after every emitted line so a crash
// leaves a valid prefix. Rows of a run are held back until every earlier run has
// finished, which keeps the file identical whether runs execute serially or in parallel.
class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& path, int first_run);

  void append(const MetricsRow& row);
  void finish_run(int run_id);

 private:
  void write_line(const std::string& line);

  std::mutex mutex_;
  std::ofstream out_;
  std::filesystem::path path_;
  int next_run_;
  std::map<int, std::vector<std::string>> pending_;
  std::map<int, bool> finished_;
};

}  // namespace lcr::harness
