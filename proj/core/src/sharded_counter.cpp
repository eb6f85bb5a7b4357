#include "kiwi/sharded_counter.hpp"

#include <vector>

namespace kiwi {

ShardedCounter::ShardedCounter(std::size_t slots)
    : cells_(std::make_unique<Cell[]>(slots)), count_(slots) {}

void ShardedCounter::add(ThreadSlot slot, std::int64_t delta) {
  Cell& c = cells_[slot.id()];
  const std::uint64_t s = c.seq.load(std::memory_order_relaxed);
  c.seq.store(s + 1, std::memory_order_relaxed);
  std::atomic_thread_fence(std::memory_order_release);
  c.value.store(c.value.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
  c.seq.store(s + 2, std::memory_order_release);
}

std::int64_t ShardedCounter::relaxed_sum() const {
  std::int64_t total = 0;
  for (std::size_t i = 0; i < count_; ++i) total += cells_[i].value.load(std::memory_order_acquire);
  return total;
}

std::int64_t ShardedCounter::sum() const {
  std::vector<std::uint64_t> seqs(count_);
  for (int attempt = 0; attempt < kSnapshotRetries; ++attempt) {
    bool stable = true;
    for (std::size_t i = 0; i < count_; ++i) {
      seqs[i] = cells_[i].seq.load(std::memory_order_acquire);
      if ((seqs[i] & 1U) != 0) stable = false;
    }
    if (!stable) continue;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < count_; ++i) total += cells_[i].value.load(std::memory_order_relaxed);
    std::atomic_thread_fence(std::memory_order_acquire);
    for (std::size_t i = 0; i < count_ && stable; ++i) {
      stable = cells_[i].seq.load(std::memory_order_relaxed) == seqs[i];
    }
    if (stable) return total;
  }
  fallbacks_.fetch_add(1, std::memory_order_relaxed);
  return relaxed_sum();
}

}  // namespace kiwi
