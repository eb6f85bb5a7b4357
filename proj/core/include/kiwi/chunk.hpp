#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "kiwi/hooks.hpp"
#include "kiwi/size_bounds.hpp"
#include "kiwi/types.hpp"

namespace kiwi {

using OrderIndex = std::int32_t;

inline constexpr OrderIndex kHead = 0;
inline constexpr OrderIndex kEnd = -1;
inline constexpr OrderIndex kNoPending = -1;

/// One versioned key slot. `key` and a fresh `data_index` are written before
/// the entry is published; `version`, `data_index` and `next` change only by CAS.
struct OrderEntry {
  std::atomic<Key> key{0};
  std::atomic<std::int64_t> version{version_word::kNone};
  std::atomic<std::int64_t> data_index{0};
  std::atomic<OrderIndex> next{kEnd};
};

/// A PPA entry the reader saw with a version (its own or one it helped assign).
struct PendingItem {
  OrderIndex index;
  std::int64_t version;
};

/// A list entry as observed during a walk.
struct ListItem {
  OrderIndex index;
  Key key;
  std::int64_t version;
  std::int64_t data_index;
};

/// An entry a new chunk is born with.
struct CompactedItem {
  Key key;
  std::int64_t version;
  MaybeValue value;
  constexpr bool operator==(const CompactedItem&) const = default;
};

/// Everything add_to_linked_list needs besides the chunk: the counters to
/// settle (may be null), the acting slot and an optional pre-CAS hook.
struct ListContext {
  BoundsCounters* bounds = nullptr;
  ThreadSlot slot{};
  const HookFn* hook = nullptr;
};

struct InsertionLocation {
  OrderIndex prev;
  OrderIndex next;
  constexpr bool operator==(const InsertionLocation&) const = default;
};

struct OverwriteResult {
  bool performed;
  std::int64_t old;
};

struct InsertOutcome {
  enum class Kind { kInsert, kOverwrite };
  Kind kind;
  /// kInsert: always true. kOverwrite: whether this call's CAS raised dataIndex.
  bool performed_cas;
  std::int64_t old_data_index;
  InsertionLocation location;
};

/// Fixed-capacity segment of the map covering [min_key, next->min_key()).
///
/// Slot 0 of the order array is a permanent head sentinel; slots 1..capacity
/// hold entries. A single counter hands out slots, and an entry's own value
/// lives in the data cell with the same index.
class Chunk {
 public:
  Chunk(Key min_key, std::size_t capacity, std::size_t max_threads);

  /// A chunk born from compaction: `items` must be sorted by (key asc, version
  /// desc) and become the linked, sorted prefix.
  Chunk(Key min_key, std::size_t capacity, std::size_t max_threads,
        std::span<const CompactedItem> items, std::uint64_t birth);

  Chunk(const Chunk&) = delete;
  Chunk& operator=(const Chunk&) = delete;

  Key min_key() const { return min_key_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t max_threads() const { return max_threads_; }
  std::int32_t sorted_prefix_len() const { return sorted_prefix_len_; }
  std::uint64_t birth() const { return birth_; }

  // --- slot allocation ---------------------------------------------------

  /// Next free slot, or kEnd when the chunk is full.
  OrderIndex allocate();
  bool full() const;
  /// Slots handed out so far (an upper bound on the list length).
  std::int32_t allocated() const;

  void init_entry(OrderIndex i, Key key, const MaybeValue& value);

  OrderEntry& entry(OrderIndex i) { return entries_[static_cast<std::size_t>(i)]; }
  const OrderEntry& entry(OrderIndex i) const { return entries_[static_cast<std::size_t>(i)]; }

  Key key_of(OrderIndex i) const { return entry(i).key.load(std::memory_order_relaxed); }
  std::int64_t version_of(OrderIndex i) const { return entry(i).version.load(std::memory_order_acquire); }
  std::int64_t data_index_of(OrderIndex i) const { return entry(i).data_index.load(std::memory_order_acquire); }

  /// Value a dataIndex designates in this chunk.
  MaybeValue value_of(std::int64_t data_index) const;

  // --- pending puts array -----------------------------------------------

  /// Publishes `i` in the caller's PPA cell and issues a store fence.
  void publish(ThreadSlot slot, OrderIndex i);
  void clear_ppa(ThreadSlot slot);
  OrderIndex ppa_at(std::size_t thread) const { return ppa_[thread].load(std::memory_order_acquire); }

  // --- versions ----------------------------------------------------------

  /// CAS NONE -> Pending(gv). Returns the word the entry holds afterwards
  /// (the caller's, a helper's, or FROZEN).
  std::int64_t assign_version(OrderIndex i, std::int64_t gv);
  /// CAS Pending(v) -> Committed(v); no-op if already committed.
  void commit(OrderIndex i);
  /// CAS NONE -> FROZEN. True if the entry is (now) frozen.
  bool try_freeze_entry(OrderIndex i);

  /// For every PPA entry with key in [lo, hi]: help an unversioned one to
  /// Pending(help_version), then report it if it has a version. Frozen
  /// entries are skipped. Appends to `out`. Issues a full fence first.
  void help_pending_puts(Key lo, Key hi, std::int64_t help_version, std::vector<PendingItem>& out);

  // --- linked list -------------------------------------------------------

  InsertionLocation find_insertion_location(Key key, std::int64_t version) const;

  /// Links entry `i` (which must carry a version) into the list, or folds it
  /// into an existing entry with the same (key, version). Whoever performs
  /// the deciding CAS settles the size bounds in `ctx`.
  InsertOutcome add_to_linked_list(OrderIndex i, const ListContext& ctx);

  /// Raises `target`'s dataIndex to `new_index` while that is newer.
  OverwriteResult overwrite_data_index(OrderIndex target, std::int64_t new_index);

  /// First list entry with key >= `key` (or kEnd), and its predecessor.
  InsertionLocation lower_bound(Key key) const;

  /// Newest value for `key` among the list and `pending`; nullopt if none or
  /// the newest is a tombstone.
  MaybeValue newest_value(Key key, std::span<const PendingItem> pending) const;

  std::vector<ListItem> list_items() const;
  std::size_t list_length() const;

  /// Sorted by (key asc, version desc), no duplicate (key, version), every
  /// key within [min_key, limit). Only meaningful at quiescent points.
  bool list_is_well_formed(const Key* limit = nullptr) const;

  // --- chunk-level state used by rebalance and the chunk list ------------

  bool frozen() const { return frozen_.load(std::memory_order_acquire); }
  void set_frozen() { frozen_.store(true, std::memory_order_seq_cst); }

  /// Successor chunk with the freeze mark stripped.
  Chunk* next_chunk() const;
  std::atomic<std::uintptr_t>& next_link() { return next_; }
  void set_next(Chunk* n) { next_.store(reinterpret_cast<std::uintptr_t>(n), std::memory_order_release); }
  /// Marks the next link so it can no longer be swung.
  void mark_next() { next_.fetch_or(kMark, std::memory_order_seq_cst); }

  Chunk* replacement() const { return replacement_.load(std::memory_order_acquire); }
  bool try_set_replacement(Chunk* first);

  /// The chunk this one replaces, until that chunk has been unlinked. A
  /// fresh chunk is reachable only once its parent is spliced out.
  Chunk* pending_parent() const { return pending_parent_.load(std::memory_order_seq_cst); }
  void set_pending_parent(Chunk* p) { pending_parent_.store(p, std::memory_order_seq_cst); }

  /// Reference count gating hand-off to the reclaimer (see KiwiMap).
  std::atomic<int>& retire_refs() { return retire_refs_; }

  static constexpr std::uintptr_t kMark = 1;
  static Chunk* unmark(std::uintptr_t v) { return reinterpret_cast<Chunk*>(v & ~kMark); }
  static bool is_marked(std::uintptr_t v) { return (v & kMark) != 0; }

 private:
  std::int64_t read_via_cas(std::atomic<std::int64_t>& word) const;
  OrderIndex read_via_cas(std::atomic<OrderIndex>& word) const;
  OrderIndex prefix_start(Key key) const;

  const Key min_key_;
  const std::size_t capacity_;
  const std::size_t max_threads_;
  std::unique_ptr<OrderEntry[]> entries_;
  std::unique_ptr<std::atomic<Value>[]> data_;
  std::unique_ptr<std::atomic<OrderIndex>[]> ppa_;
  std::atomic<std::int32_t> alloc_{1};
  std::int32_t sorted_prefix_len_ = 0;
  std::uint64_t birth_ = 0;
  std::atomic<bool> frozen_{false};
  std::atomic<std::uintptr_t> next_{0};
  std::atomic<Chunk*> replacement_{nullptr};
  std::atomic<Chunk*> pending_parent_{nullptr};
  std::atomic<int> retire_refs_{1};
};

}  // namespace kiwi
