#include "lcr/harness/metrics.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

#include "lcr/errors.hpp"
#include "lcr/harness/run_config.hpp"

namespace lcr::harness {

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

template <typename T>
T parse_number(const std::string& cell, const std::string& line) {
  T value{};
  auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || end != cell.data() + cell.size()) {
    throw ConfigError("malformed metrics cell '" + cell + "' in line: " + line);
  }
  return value;
}

std::optional<double> parse_optional(const std::string& cell, const std::string& line) {
  if (cell.empty()) return std::nullopt;
  return parse_number<double>(cell, line);
}

}  // namespace

std::string format_metrics_row(const MetricsRow& row) {
  std::string out;
  out += std::to_string(row.run_id) + ",";
  out += std::to_string(row.seed) + ",";
  out += std::to_string(row.episode) + ",";
  out += std::to_string(row.total_env_steps) + ",";
  out += format_double(row.episode_return) + ",";
  out += format_double(row.epsilon) + ",";
  out += optional_cell(row.mean_td_loss) + ",";
  out += optional_cell(row.lcr_loss_first) + ",";
  out += optional_cell(row.lcr_loss_last);
  return out;
}

MetricsRow parse_metrics_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  if (cells.size() != 9) throw ConfigError("metrics line has " + std::to_string(cells.size()) + " cells: " + line);
  MetricsRow row;
  row.run_id = parse_number<int>(cells[0], line);
  row.seed = parse_number<std::uint64_t>(cells[1], line);
  row.episode = parse_number<int>(cells[2], line);
  row.total_env_steps = parse_number<std::uint64_t>(cells[3], line);
  row.episode_return = parse_number<double>(cells[4], line);
  row.epsilon = parse_number<double>(cells[5], line);
  row.mean_td_loss = parse_optional(cells[6], line);
  row.lcr_loss_first = parse_optional(cells[7], line);
  row.lcr_loss_last = parse_optional(cells[8], line);
  return row;
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != metrics_header) {
    throw ConfigError("'" + path.string() + "' does not start with the metrics header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(parse_metrics_row(line));
  }
  return rows;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, int first_run)
    : out_(path, std::ios::trunc), path_(path), next_run_(first_run) {
  if (!out_) throw std::runtime_error("cannot open metrics file '" + path.string() + "' for writing");
  write_line(metrics_header);
}

void MetricsWriter::write_line(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("write to '" + path_.string() + "' failed");
}

void MetricsWriter::append(const MetricsRow& row) {
  std::lock_guard lock(mutex_);
  std::string line = format_metrics_row(row);
  if (row.run_id == next_run_) {
    write_line(line);
  } else {
    pending_[row.run_id].push_back(std::move(line));
  }
}

void MetricsWriter::finish_run(int run_id) {
  std::lock_guard lock(mutex_);
  finished_[run_id] = true;
  while (finished_.count(next_run_)) {
    finished_.erase(next_run_);
    ++next_run_;
    if (auto it = pending_.find(next_run_); it != pending_.end()) {
      for (const auto& line : it->second) write_line(line);
      pending_.erase(it);
    }
  }
}

}  // namespace lcr::harness
