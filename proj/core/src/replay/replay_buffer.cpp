#include "lcr/replay/replay_buffer.hpp"

#include "lcr/errors.hpp"

namespace lcr::replay {

void validate_window_size(std::size_t k) {
  if (k < 2 || k % 2 != 0) throw ConfigError("neighbor count K must be even and >= 2, got " + std::to_string(k));
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t min_size) : min_size_(min_size) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  if (min_size > capacity) throw ConfigError("replay min_size exceeds capacity");
  storage_.resize(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (size_ < storage_.size()) {
    storage_[physical(size_)] = std::move(t);
    ++size_;
  } else {
    storage_[head_] = std::move(t);
    head_ = (head_ + 1) % storage_.size();
  }
  ++total_pushes_;
}

const Transition& ReplayBuffer::at(std::size_t position) const {
  if (position >= size_) throw UsageError("replay position " + std::to_string(position) + " out of range");
  return storage_[physical(position)];
}

std::optional<std::vector<TransitionRef>> ReplayBuffer::sample_uniform(Rng& rng, std::size_t n) const {
  if (!ready()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<TransitionRef> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(at(pick(rng)));
  return out;
}

std::vector<TransitionRef> ReplayBuffer::last_window(std::size_t count) const {
  const std::size_t n = std::min(count, size_);
  std::vector<TransitionRef> out;
  out.reserve(n);
  for (std::size_t p = size_ - n; p < size_; ++p) out.emplace_back(at(p));
  return out;
}

std::optional<std::vector<std::size_t>> ReplayBuffer::neighbor_positions(std::size_t center, std::size_t k,
                                                                        std::size_t first) const {
  validate_window_size(k);
  const std::size_t half = k / 2;
  if (center >= size_ || center < first + half || center + half >= size_) return std::nullopt;
  const Transition& mid = at(center);
  const Transition& lo = at(center - half);
  const Transition& hi = at(center + half);
  // Episodes are pushed contiguously, so matching ids and step offsets at both ends
  // imply every position in between belongs to the same episode.
  if (lo.episode_id != mid.episode_id || hi.episode_id != mid.episode_id) return std::nullopt;
  if (mid.step_index < half || lo.step_index != mid.step_index - half || hi.step_index != mid.step_index + half) {
    return std::nullopt;
  }
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t p = center - half; p <= center + half; ++p) {
    if (p != center) out.push_back(p);
  }
  return out;
}

std::optional<std::vector<TransitionRef>> ReplayBuffer::neighbor_window(std::size_t center, std::size_t k) const {
  auto positions = neighbor_positions(center, k);
  if (!positions) return std::nullopt;
  std::vector<TransitionRef> out;
  out.reserve(k);
  for (std::size_t p : *positions) out.emplace_back(at(p));
  return out;
}

}  // namespace lcr::replay
