#include "kiwi/size_bounds.hpp"

namespace kiwi {

namespace {

// Pre-publish steps taken for a put: lower -1 for a tombstone, upper +1 for a
// value. Once the change to the key count is certain, each bound is moved by
// (actual change - step already taken).
CounterDelta settle(bool tombstone, bool was_present) {
  const int actual = (tombstone ? 0 : 1) - (was_present ? 1 : 0);
  const int lower_step = tombstone ? -1 : 0;
  const int upper_step = tombstone ? 0 : 1;
  return {actual - lower_step, actual - upper_step};
}

// The item went in behind a newer version of the same key: nothing changed.
CounterDelta shadowed(bool tombstone) {
  return tombstone ? CounterDelta{1, 0} : CounterDelta{0, -1};
}

}  // namespace

CounterDelta delta_after_overwrite(const OverwriteContext& ctx) {
  if (!ctx.performed_cas) return {};
  if (ctx.prev_key_equal) return shadowed(ctx.value_is_tombstone);
  // A newer version may have slipped in ahead of next; can't tell.
  if (!ctx.prev_witness_valid) return {};
  return settle(ctx.value_is_tombstone, !ctx.old_data_was_tombstone);
}

CounterDelta delta_after_insert(const InsertContext& ctx) {
  if (ctx.prev_key_equal) return shadowed(ctx.value_is_tombstone);
  if (!ctx.next_key_equal) return settle(ctx.value_is_tombstone, false);
  if (!ctx.next_witness_valid) return {};
  return settle(ctx.value_is_tombstone, !ctx.next_data_was_tombstone);
}

BoundsCounters::BoundsCounters(std::size_t slots, bool enabled)
    : enabled_(enabled),
      lower_(slots),
      upper_(slots),
      ledger_(std::make_unique<LedgerCell[]>(slots)) {}

void BoundsCounters::apply(ThreadSlot slot, CounterDelta d) {
  if (d.lower != 0) lower_.add(slot, d.lower);
  if (d.upper != 0) upper_.add(slot, d.upper);
}

void BoundsCounters::on_published(ThreadSlot slot, bool tombstone) {
  if (!enabled_) return;
  if (ledger_on_) {
    LedgerCell& c = ledger_[slot.id()];
    if (c.open) violations_.fetch_add(1);
    c.open = true;
  }
  apply(slot, tombstone ? CounterDelta{-1, 0} : CounterDelta{0, 1});
}

void BoundsCounters::on_undone(ThreadSlot slot, bool tombstone) {
  if (!enabled_) return;
  if (ledger_on_) {
    LedgerCell& c = ledger_[slot.id()];
    if (!c.open) violations_.fetch_add(1);
    c.open = false;
    undos_.fetch_add(1);
  }
  apply(slot, tombstone ? CounterDelta{1, 0} : CounterDelta{0, -1});
}

void BoundsCounters::on_versioned(ThreadSlot slot) {
  if (!enabled_ || !ledger_on_) return;
  ledger_[slot.id()].open = false;
}

void BoundsCounters::update_after_overwrite(ThreadSlot slot, const OverwriteContext& ctx) {
  if (!enabled_) return;
  apply(slot, delta_after_overwrite(ctx));
}

void BoundsCounters::update_after_insert(ThreadSlot slot, const InsertContext& ctx) {
  if (!enabled_) return;
  apply(slot, delta_after_insert(ctx));
}

void BoundsCounters::require_enabled() const {
  if (!enabled_) throw UnsupportedOperation("size bounds are disabled for this map");
}

std::int64_t BoundsCounters::size_lower_bound() const {
  require_enabled();
  return lower_.sum();
}

std::int64_t BoundsCounters::size_upper_bound() const {
  require_enabled();
  return upper_.sum();
}

EmptyAnswer BoundsCounters::is_empty() const {
  if (size_lower_bound() >= 1) return EmptyAnswer::kFalse;
  if (size_upper_bound() <= 0) return EmptyAnswer::kTrue;
  return EmptyAnswer::kUnknown;
}

SizeAnswer BoundsCounters::size() const {
  const std::int64_t lower1 = size_lower_bound();
  const std::int64_t upper = size_upper_bound();
  if (lower1 >= upper) return upper;
  const std::int64_t lower2 = size_lower_bound();
  if (lower2 >= upper) return lower2;
  return std::nullopt;
}

}  // namespace kiwi
