#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lcr/numerics/random.hpp"
#include "lcr/numerics/tensor.hpp"

namespace lcr::replay {

using numerics::Tensor;

struct Transition {
  Tensor state;
  int action = 0;
  double reward = 0.0;
  Tensor next_state;
  bool terminated = false;
  std::uint64_t episode_id = 0;
  std::uint64_t step_index = 0;  // 0-based position within the episode
};

using TransitionRef = std::reference_wrapper<const Transition>;

// Fixed-capacity ring of transitions. Positions are logical: 0 is the oldest stored
// transition and size()-1 the newest, regardless of where the ring head sits.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity, std::size_t min_size = 1);

  void push(Transition t);

  std::size_t size() const noexcept { return size_; }
  std::size_t capacity() const noexcept { return storage_.size(); }
  std::size_t min_size() const noexcept { return min_size_; }
  std::uint64_t total_pushes() const noexcept { return total_pushes_; }
  bool ready() const noexcept { return size_ >= min_size_ && size_ > 0; }

  const Transition& at(std::size_t position) const;

  // n i.i.d. uniform draws with replacement; nullopt until min_size transitions exist.
  std::optional<std::vector<TransitionRef>> sample_uniform(Rng& rng, std::size_t n) const;

  // The min(count, size) most recent transitions, oldest first.
  std::vector<TransitionRef> last_window(std::size_t count) const;

  // Positions of the K/2 transitions before and K/2 after `center` that belong to the
  // same episode, in temporal order and excluding the center. nullopt when that window
  // does not fit inside [first, size) or crosses an episode boundary. K must be even
  // and at least 2.
  std::optional<std::vector<std::size_t>> neighbor_positions(std::size_t center, std::size_t k,
                                                             std::size_t first = 0) const;
  std::optional<std::vector<TransitionRef>> neighbor_window(std::size_t center, std::size_t k) const;

 private:
  std::size_t physical(std::size_t position) const noexcept { return (head_ + position) % storage_.size(); }

  std::vector<Transition> storage_;
  std::size_t min_size_;
  std::size_t head_ = 0;  // physical slot of logical position 0
  std::size_t size_ = 0;
  std::uint64_t total_pushes_ = 0;
};

void validate_window_size(std::size_t k);

}  // namespace lcr::replay
