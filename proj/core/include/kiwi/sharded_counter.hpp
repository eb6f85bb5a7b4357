#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>

#include "kiwi/types.hpp"

namespace kiwi {

/// Counter split into one cell per thread slot. Each cell has a single writer
/// (its slot owner) and carries a sequence word, so `sum()` can take a
/// double-collect snapshot of all cells. If writers keep interfering past the
/// retry budget, `sum()` falls back to a plain (non-atomic) sum.
class ShardedCounter {
 public:
  explicit ShardedCounter(std::size_t slots);

  void add(ThreadSlot slot, std::int64_t delta);
  void increment(ThreadSlot slot) { add(slot, 1); }
  void decrement(ThreadSlot slot) { add(slot, -1); }

  std::int64_t sum() const;

  /// Sum without snapshot validation.
  std::int64_t relaxed_sum() const;

  std::size_t cells() const { return count_; }

  /// Number of sum() calls that exhausted their retries.
  std::uint64_t fallback_count() const { return fallbacks_.load(std::memory_order_relaxed); }

  static constexpr int kSnapshotRetries = 64;

 private:
  struct alignas(64) Cell {
    std::atomic<std::uint64_t> seq{0};
    std::atomic<std::int64_t> value{0};
  };

  std::unique_ptr<Cell[]> cells_;
  std::size_t count_;
  mutable std::atomic<std::uint64_t> fallbacks_{0};
};

}  // namespace kiwi
