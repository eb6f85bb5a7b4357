#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "kiwi/chunk.hpp"

namespace kiwi {

struct RebalancePolicy {
  int rebalance_prob_perc = 2;
  double sorted_rebalance_ratio = 1.8;
  /// Fraction of MAX_ITEMS a freshly compacted chunk is filled to.
  double fill_factor = 0.5;

  /// Throws std::invalid_argument on out-of-range knobs.
  void validate() const;
};

/// No scan in flight: compaction keeps only the newest version of each key.
inline constexpr std::int64_t kNoActiveScan = std::numeric_limits<std::int64_t>::max();

using RebalanceRng = std::minstd_rand;

/// True when the chunk is full, or when its sorted prefix has fallen behind the
/// list (prefix * ratio < length) and a Bernoulli(prob_perc / 100) draw hits.
bool check_rebalance(std::int64_t sorted_prefix_len, std::int64_t list_length, bool full,
                     const RebalancePolicy& policy, RebalanceRng& rng);
bool check_rebalance(const Chunk& chunk, const RebalancePolicy& policy, RebalanceRng& rng);

/// Sets the frozen flag, marks the next link and CASes every unversioned
/// entry to FROZEN. Idempotent. Afterwards no entry in the chunk can gain a
/// version.
void freeze_chunk(Chunk& chunk);

/// Links every Pending entry of a frozen chunk into its list and commits it.
void help_frozen_chunk_puts(Chunk& chunk, const ListContext& ctx);

/// Per key, the list entries compaction keeps: everything newer than
/// `min_active_scan` plus the newest entry at or below it, or nothing when the
/// newest entry is a tombstone no active scan can see past.
std::vector<CompactedItem> compact_items(const Chunk& chunk, std::int64_t min_active_scan);

struct CompactionShape {
  std::size_t max_items;
  double fill_factor;
  std::size_t max_threads;
  std::uint64_t birth;
};

/// Copies a frozen, fully helped chunk into 1..k fresh chunks whose ranges
/// partition the old one. Never splits the versions of one key.
std::vector<std::unique_ptr<Chunk>> copy_compact(const Chunk& chunk, std::int64_t min_active_scan,
                                                 const CompactionShape& shape);

/// Scan kernel for one chunk: ascending unique keys in [lo, hi] with the newest
/// (version, dataIndex) at or below `scan_version` among list entries and
/// `pending`; tombstone winners are dropped. Appends to `out`.
void copy_range(const Chunk& chunk, Key lo, Key hi, std::int64_t scan_version,
                std::span<const PendingItem> pending, std::vector<std::pair<Key, Value>>& out);

}  // namespace kiwi
