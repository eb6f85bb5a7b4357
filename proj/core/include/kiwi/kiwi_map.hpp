#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "kiwi/chunk.hpp"
#include "kiwi/chunk_index.hpp"
#include "kiwi/epoch.hpp"
#include "kiwi/hooks.hpp"
#include "kiwi/rebalance.hpp"
#include "kiwi/size_bounds.hpp"
#include "kiwi/types.hpp"

namespace kiwi {

struct MapOptions {
  std::size_t max_threads = 64;
  /// Order/data array capacity of a chunk (MAX_ITEMS).
  std::size_t max_items = 4500;
  RebalancePolicy policy{};
  bool bounds_enabled = true;
  std::uint64_t seed = 0x6b697769;
};

using ScanResult = std::vector<std::pair<Key, Value>>;

/// Concurrent sorted map of integer keys to integer values.
///
/// Keys live in a linked list of chunks, each holding a sorted-prefix
/// accelerated linked list of versioned entries. put is lock-free; get and
/// scan are wait-free and linearizable. A scan takes the global version as
/// its snapshot; puts obtain versions from it, and readers help pending puts
/// they might otherwise miss.
///
/// Every thread calls register_thread() once and passes its slot to each
/// operation. Retired chunks are reclaimed through an epoch scheme.
class KiwiMap {
 public:
  explicit KiwiMap(MapOptions options = {});
  ~KiwiMap();

  KiwiMap(const KiwiMap&) = delete;
  KiwiMap& operator=(const KiwiMap&) = delete;

  /// Throws RegistrationError once max_threads slots are taken.
  ThreadSlot register_thread();

  void put(ThreadSlot slot, Key key, MaybeValue value);
  void remove(ThreadSlot slot, Key key) { put(slot, key, kTombstone); }
  MaybeValue get(ThreadSlot slot, Key key);

  /// Pairs with min_key <= key <= max_key in ascending key order. Appends to `out`.
  void scan(ThreadSlot slot, Key min_key, Key max_key, ScanResult& out);
  ScanResult scan(ThreadSlot slot, Key min_key, Key max_key);

  // Size bounds; each throws UnsupportedOperation when bounds are disabled.
  std::int64_t size_lower_bound() const { return bounds_.size_lower_bound(); }
  std::int64_t size_upper_bound() const { return bounds_.size_upper_bound(); }
  EmptyAnswer is_empty() const { return bounds_.is_empty(); }
  SizeAnswer size() const { return bounds_.size(); }

  const MapOptions& options() const { return options_; }
  BoundsCounters& bounds() { return bounds_; }

  /// Installs a lifecycle hook. Not synchronized: set it before threads run.
  void set_hook(HookFn hook) { hook_ = std::move(hook); }

  /// Live chunk covering `key`, following every replacement.
  Chunk* find_chunk(Key key) const;

  /// Rebalances the live chunk whose min_key equals `chunk_min_key`.
  /// Returns false if there is no such chunk or another rebalancer won.
  bool force_rebalance(ThreadSlot slot, Key chunk_min_key);
  /// Rebalances whichever live chunk covers `key`. Safe under concurrency.
  bool rebalance_at(ThreadSlot slot, Key key);

  /// Freeze, help, compact and replace `chunk`. True if this caller's copy
  /// was the one installed.
  bool rebalance(ThreadSlot slot, Chunk* chunk);

  std::int64_t global_version() const { return global_version_.load(); }
  std::uint64_t rebalance_count() const { return rebalances_.load(); }
  std::size_t registered_threads() const { return registered_.load(); }

  /// Live chunks in list order. Quiescent use only.
  std::vector<const Chunk*> chunks() const;

  /// Every chunk's list is well formed and within its key range, and chunk
  /// min keys strictly increase. Quiescent use only.
  bool validate() const;

  /// Smallest snapshot version any in-flight scan may still read.
  std::int64_t min_active_scan_version() const;

  /// Objects waiting in the reclaimer.
  std::size_t pending_reclamation() const { return reclaimer_.pending(); }

 private:
  struct alignas(64) SlotLocal {
    RebalanceRng rng;
    std::vector<PendingItem> pending;
  };

  static constexpr std::uint64_t kFollowAll = ~std::uint64_t{0};

  Chunk* locate(Key key, std::uint64_t cutoff) const;
  void splice(ThreadSlot slot, Chunk* chunk);
  /// Pointer to the link that currently holds `chunk`, or nullptr if it has
  /// been unlinked. `owner` receives the chunk owning that link.
  std::atomic<std::uintptr_t>* find_pred_link(Chunk* chunk, Chunk*& owner);
  void release_retire_ref(ThreadSlot slot, Chunk* chunk);
  void run_hook(ThreadSlot slot, HookPoint p) const {
    if (hook_) hook_(slot, p);
  }
  ListContext list_context(ThreadSlot slot) {
    return {bounds_.enabled() ? &bounds_ : nullptr, slot, &hook_};
  }

  MapOptions options_;
  EpochReclaimer reclaimer_;
  BoundsCounters bounds_;
  std::atomic<std::uintptr_t> head_{0};
  std::unique_ptr<ChunkIndex> index_;
  std::atomic<std::int64_t> global_version_{1};
  std::atomic<std::uint64_t> birth_stamp_{0};
  std::unique_ptr<std::atomic<std::int64_t>[]> psa_;
  std::unique_ptr<SlotLocal[]> locals_;
  std::atomic<std::size_t> registered_{0};
  std::atomic<std::uint64_t> rebalances_{0};
  HookFn hook_;
};

}  // namespace kiwi
