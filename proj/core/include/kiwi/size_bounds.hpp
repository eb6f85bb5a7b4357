#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>

#include "kiwi/sharded_counter.hpp"
#include "kiwi/types.hpp"

namespace kiwi {

enum class EmptyAnswer { kTrue, kFalse, kUnknown };

/// Known size, or std::nullopt when the bounds could not pin it down.
using SizeAnswer = std::optional<std::int64_t>;

/// What the thread that won an overwrite CAS knows about it.
struct OverwriteContext {
  bool performed_cas = false;
  bool value_is_tombstone = false;
  bool prev_key_equal = false;
  /// prev.next re-read after the CAS still equals the value seen at find time.
  bool prev_witness_valid = false;
  bool old_data_was_tombstone = false;
};

/// What the thread that won a list-insert CAS knows about it. `next_key_equal`
/// false means next is the end of the list or has a larger key.
struct InsertContext {
  bool value_is_tombstone = false;
  bool prev_key_equal = false;
  bool next_key_equal = false;
  /// next.dataIndex re-read after the CAS still equals the value seen at find time.
  bool next_witness_valid = false;
  bool next_data_was_tombstone = false;
};

struct CounterDelta {
  int lower = 0;
  int upper = 0;
  constexpr bool operator==(const CounterDelta&) const = default;
};

/// Compensation owed after an overwrite. Only the thread whose CAS performed
/// the overwrite may apply it.
CounterDelta delta_after_overwrite(const OverwriteContext& ctx);

/// Compensation owed after a list insertion, applied by the inserting thread.
CounterDelta delta_after_insert(const InsertContext& ctx);

/// sizeLowerBound / sizeUpperBound accounting.
///
/// Before a put becomes visible, the lower bound is decremented for a tombstone
/// and the upper bound incremented for a value, as if the put changed the key
/// count. Whoever performs the list CAS later compensates when it can prove
/// what actually happened; when it cannot, the conservative step stays, which
/// only widens the bracket.
class BoundsCounters {
 public:
  BoundsCounters(std::size_t slots, bool enabled);

  bool enabled() const { return enabled_; }

  /// Called by put strictly before publishing its entry to the PPA.
  void on_published(ThreadSlot slot, bool tombstone);
  /// Called by put when its entry was frozen while still unversioned.
  void on_undone(ThreadSlot slot, bool tombstone);
  /// Called by put once its entry has a version; closes the ledger attempt.
  void on_versioned(ThreadSlot slot);

  void update_after_overwrite(ThreadSlot slot, const OverwriteContext& ctx);
  void update_after_insert(ThreadSlot slot, const InsertContext& ctx);

  std::int64_t size_lower_bound() const;
  std::int64_t size_upper_bound() const;

  EmptyAnswer is_empty() const;
  SizeAnswer size() const;

  /// Per-attempt ledger: counts publish/undo pairings that broke discipline
  /// (an undo without an open publish, or a publish over an open one).
  void enable_ledger(bool on) { ledger_on_ = on; }
  std::uint64_t ledger_violations() const { return violations_.load(); }
  std::uint64_t ledger_undos() const { return undos_.load(); }

 private:
  void require_enabled() const;
  void apply(ThreadSlot slot, CounterDelta d);

  struct alignas(64) LedgerCell {
    bool open = false;
  };

  bool enabled_;
  ShardedCounter lower_;
  ShardedCounter upper_;
  bool ledger_on_ = false;
  std::unique_ptr<LedgerCell[]> ledger_;
  std::atomic<std::uint64_t> violations_{0};
  std::atomic<std::uint64_t> undos_{0};
};

}  // namespace kiwi
