#pragma once

#include <atomic>
#include <span>
#include <utility>
#include <vector>

#include "kiwi/chunk.hpp"
#include "kiwi/epoch.hpp"

namespace kiwi {

/// minKey -> chunk accelerator. Readers binary-search an immutable snapshot
/// (wait-free); writers publish a modified copy by CAS and hand the old
/// snapshot to the reclaimer. Entries may lag behind splits, so a lookup only
/// promises a chunk with min_key <= key that was reachable at some point.
class ChunkIndex {
 public:
  explicit ChunkIndex(Chunk* first);
  ~ChunkIndex();

  ChunkIndex(const ChunkIndex&) = delete;
  ChunkIndex& operator=(const ChunkIndex&) = delete;

  /// Chunk with the largest indexed min_key <= key, or nullptr.
  Chunk* lookup(Key key) const;

  /// Drops every retired chunk (replacement set) and indexes each of `fresh`
  /// that is still live. Must run after `fresh` is reachable from the list.
  void update(ThreadSlot slot, EpochReclaimer& reclaimer, std::span<Chunk* const> fresh);

  std::size_t size() const;

 private:
  using Entries = std::vector<std::pair<Key, Chunk*>>;
  std::atomic<Entries*> current_;
};

}  // namespace kiwi
