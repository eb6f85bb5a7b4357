#include "kiwi/chunk.hpp"

#include <cassert>

namespace kiwi {

namespace {

// Reads `word` with a successful read-modify-write, so the value is the latest
// in its modification order, as a CAS by another thread would see it.
template <class T>
T read_latest(std::atomic<T>& word) {
  T v = word.load(std::memory_order_seq_cst);
  while (!word.compare_exchange_weak(v, v, std::memory_order_seq_cst)) {
  }
  return v;
}

// (version, allocation slot) ordering of two candidates for the same key.
bool newer(std::int64_t ver_a, std::int64_t data_a, std::int64_t ver_b, std::int64_t data_b) {
  if (ver_a != ver_b) return ver_a > ver_b;
  return data_index::slot_of(data_a) > data_index::slot_of(data_b);
}

}  // namespace

Chunk::Chunk(Key min_key, std::size_t capacity, std::size_t max_threads)
    : min_key_(min_key),
      capacity_(capacity),
      max_threads_(max_threads),
      entries_(std::make_unique<OrderEntry[]>(capacity + 1)),
      data_(std::make_unique<std::atomic<Value>[]>(capacity + 1)),
      ppa_(std::make_unique<std::atomic<OrderIndex>[]>(max_threads)) {
  for (std::size_t t = 0; t < max_threads_; ++t) ppa_[t].store(kNoPending, std::memory_order_relaxed);
}

Chunk::Chunk(Key min_key, std::size_t capacity, std::size_t max_threads,
             std::span<const CompactedItem> items, std::uint64_t birth)
    : Chunk(min_key, capacity, max_threads) {
  assert(items.size() <= capacity);
  const auto n = static_cast<OrderIndex>(items.size());
  for (OrderIndex i = 1; i <= n; ++i) {
    const CompactedItem& item = items[static_cast<std::size_t>(i - 1)];
    OrderEntry& e = entry(i);
    e.key.store(item.key, std::memory_order_relaxed);
    e.version.store(version_word::committed(item.version), std::memory_order_relaxed);
    if (item.value) {
      data_[static_cast<std::size_t>(i)].store(*item.value, std::memory_order_relaxed);
      e.data_index.store(i, std::memory_order_relaxed);
    } else {
      e.data_index.store(data_index::tombstone_for(i), std::memory_order_relaxed);
    }
    e.next.store(i < n ? i + 1 : kEnd, std::memory_order_relaxed);
  }
  entry(kHead).next.store(n > 0 ? 1 : kEnd, std::memory_order_relaxed);
  sorted_prefix_len_ = n;
  alloc_.store(n + 1, std::memory_order_relaxed);
  birth_ = birth;
  std::atomic_thread_fence(std::memory_order_release);
}

OrderIndex Chunk::allocate() {
  const auto limit = static_cast<std::int32_t>(capacity_);
  if (alloc_.load(std::memory_order_relaxed) > limit) return kEnd;
  const std::int32_t i = alloc_.fetch_add(1, std::memory_order_acq_rel);
  return i > limit ? kEnd : i;
}

bool Chunk::full() const {
  return alloc_.load(std::memory_order_acquire) > static_cast<std::int32_t>(capacity_);
}

std::int32_t Chunk::allocated() const {
  const std::int32_t a = alloc_.load(std::memory_order_acquire) - 1;
  const auto cap = static_cast<std::int32_t>(capacity_);
  return a < cap ? a : cap;
}

void Chunk::init_entry(OrderIndex i, Key key, const MaybeValue& value) {
  OrderEntry& e = entry(i);
  e.key.store(key, std::memory_order_relaxed);
  if (value) {
    data_[static_cast<std::size_t>(i)].store(*value, std::memory_order_relaxed);
    e.data_index.store(i, std::memory_order_release);
  } else {
    e.data_index.store(data_index::tombstone_for(i), std::memory_order_release);
  }
}

MaybeValue Chunk::value_of(std::int64_t d) const {
  if (data_index::is_tombstone(d)) return std::nullopt;
  return data_[static_cast<std::size_t>(d)].load(std::memory_order_relaxed);
}

void Chunk::publish(ThreadSlot slot, OrderIndex i) {
  ppa_[slot.id()].store(i, std::memory_order_seq_cst);
  std::atomic_thread_fence(std::memory_order_seq_cst);
}

void Chunk::clear_ppa(ThreadSlot slot) { ppa_[slot.id()].store(kNoPending, std::memory_order_release); }

std::int64_t Chunk::assign_version(OrderIndex i, std::int64_t gv) {
  std::int64_t w = version_word::kNone;
  if (entry(i).version.compare_exchange_strong(w, version_word::pending(gv), std::memory_order_seq_cst)) {
    return version_word::pending(gv);
  }
  return w;
}

void Chunk::commit(OrderIndex i) {
  std::int64_t w = entry(i).version.load(std::memory_order_acquire);
  if (version_word::is_pending(w)) {
    entry(i).version.compare_exchange_strong(w, version_word::committed(version_word::number(w)),
                                             std::memory_order_seq_cst);
  }
}

bool Chunk::try_freeze_entry(OrderIndex i) {
  std::int64_t w = version_word::kNone;
  if (entry(i).version.compare_exchange_strong(w, version_word::kFrozen, std::memory_order_seq_cst)) return true;
  return version_word::is_frozen(w);
}

void Chunk::help_pending_puts(Key lo, Key hi, std::int64_t help_version, std::vector<PendingItem>& out) {
  std::atomic_thread_fence(std::memory_order_seq_cst);
  for (std::size_t t = 0; t < max_threads_; ++t) {
    const OrderIndex i = ppa_[t].load(std::memory_order_seq_cst);
    if (i == kNoPending) continue;
    const Key k = key_of(i);
    if (k < lo || k > hi) continue;
    std::int64_t w = entry(i).version.load(std::memory_order_seq_cst);
    if (version_word::is_none(w)) {
      if (entry(i).version.compare_exchange_strong(w, version_word::pending(help_version),
                                                   std::memory_order_seq_cst)) {
        w = version_word::pending(help_version);
      }
    }
    if (version_word::has_version(w)) out.push_back({i, version_word::number(w)});
  }
}

OrderIndex Chunk::prefix_start(Key key) const {
  // Greatest sorted-prefix entry with a key strictly below `key`.
  OrderIndex lo = 1;
  OrderIndex hi = sorted_prefix_len_;
  OrderIndex found = kHead;
  while (lo <= hi) {
    const OrderIndex mid = lo + (hi - lo) / 2;
    if (key_of(mid) < key) {
      found = mid;
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  return found;
}

InsertionLocation Chunk::find_insertion_location(Key key, std::int64_t version) const {
  OrderIndex prev = prefix_start(key);
  OrderIndex cur = entry(prev).next.load(std::memory_order_acquire);
  while (cur != kEnd) {
    const Key k = key_of(cur);
    if (k > key) break;
    if (k == key && version_word::number(version_of(cur)) <= version) break;
    prev = cur;
    cur = entry(cur).next.load(std::memory_order_acquire);
  }
  return {prev, cur};
}

InsertionLocation Chunk::lower_bound(Key key) const {
  OrderIndex prev = prefix_start(key);
  OrderIndex cur = entry(prev).next.load(std::memory_order_acquire);
  while (cur != kEnd && key_of(cur) < key) {
    prev = cur;
    cur = entry(cur).next.load(std::memory_order_acquire);
  }
  return {prev, cur};
}

OverwriteResult Chunk::overwrite_data_index(OrderIndex target, std::int64_t new_index) {
  std::atomic<std::int64_t>& word = entry(target).data_index;
  std::int64_t old = word.load(std::memory_order_seq_cst);
  while (data_index::slot_of(new_index) > data_index::slot_of(old)) {
    if (word.compare_exchange_weak(old, new_index, std::memory_order_seq_cst)) return {true, old};
  }
  return {false, old};
}

InsertOutcome Chunk::add_to_linked_list(OrderIndex i, const ListContext& ctx) {
  OrderEntry& e = entry(i);
  const Key key = key_of(i);
  const std::int64_t version = version_word::number(e.version.load(std::memory_order_acquire));
  assert(version > 0);

  for (;;) {
    const OrderIndex own_next = e.next.load(std::memory_order_seq_cst);
    const InsertionLocation loc = find_insertion_location(key, version);
    const bool next_same_key = loc.next != kEnd && key_of(loc.next) == key;
    const bool prev_same_key = loc.prev != kHead && key_of(loc.prev) == key;

    if (next_same_key && version_word::number(version_of(loc.next)) == version) {
      const std::int64_t incoming = e.data_index.load(std::memory_order_acquire);
      const OverwriteResult r = overwrite_data_index(loc.next, incoming);
      if (r.performed && ctx.bounds != nullptr) {
        OverwriteContext oc;
        oc.performed_cas = true;
        oc.value_is_tombstone = data_index::is_tombstone(incoming);
        oc.prev_key_equal = prev_same_key;
        oc.prev_witness_valid = read_latest(entry(loc.prev).next) == loc.next;
        oc.old_data_was_tombstone = data_index::is_tombstone(r.old);
        ctx.bounds->update_after_overwrite(ctx.slot, oc);
      }
      return {InsertOutcome::Kind::kOverwrite, r.performed, r.old, loc};
    }

    const std::int64_t next_data_seen = next_same_key ? data_index_of(loc.next) : 0;

    // The entry's own next may only move while it is unlinked; a CAS from the
    // value read before the search keeps a racing co-inserter from rewriting
    // it after another thread has already linked the entry.
    OrderIndex expected = own_next;
    if (!e.next.compare_exchange_strong(expected, loc.next, std::memory_order_seq_cst)) continue;
    if (ctx.hook != nullptr && *ctx.hook) (*ctx.hook)(ctx.slot, HookPoint::kPreListCas);
    expected = loc.next;
    if (!entry(loc.prev).next.compare_exchange_strong(expected, i, std::memory_order_seq_cst)) continue;

    if (ctx.bounds != nullptr) {
      InsertContext ic;
      ic.value_is_tombstone = data_index::is_tombstone(e.data_index.load(std::memory_order_acquire));
      ic.prev_key_equal = prev_same_key;
      ic.next_key_equal = next_same_key;
      ic.next_witness_valid = next_same_key && read_latest(entry(loc.next).data_index) == next_data_seen;
      ic.next_data_was_tombstone = data_index::is_tombstone(next_data_seen);
      ctx.bounds->update_after_insert(ctx.slot, ic);
    }
    return {InsertOutcome::Kind::kInsert, true, 0, loc};
  }
}

MaybeValue Chunk::newest_value(Key key, std::span<const PendingItem> pending) const {
  bool found = false;
  std::int64_t best_ver = 0;
  std::int64_t best_data = 0;

  const InsertionLocation loc = lower_bound(key);
  if (loc.next != kEnd && key_of(loc.next) == key) {
    found = true;
    best_ver = version_word::number(version_of(loc.next));
    best_data = data_index_of(loc.next);
  }
  // A PPA item counts even when the key has no list entry yet.
  for (const PendingItem& p : pending) {
    if (key_of(p.index) != key) continue;
    const std::int64_t d = data_index_of(p.index);
    if (!found || newer(p.version, d, best_ver, best_data)) {
      found = true;
      best_ver = p.version;
      best_data = d;
    }
  }
  if (!found) return std::nullopt;
  return value_of(best_data);
}

std::vector<ListItem> Chunk::list_items() const {
  std::vector<ListItem> out;
  OrderIndex cur = entry(kHead).next.load(std::memory_order_acquire);
  while (cur != kEnd && out.size() <= capacity_) {
    out.push_back({cur, key_of(cur), version_word::number(version_of(cur)), data_index_of(cur)});
    cur = entry(cur).next.load(std::memory_order_acquire);
  }
  return out;
}

std::size_t Chunk::list_length() const { return list_items().size(); }

bool Chunk::list_is_well_formed(const Key* limit) const {
  std::size_t steps = 0;
  OrderIndex cur = entry(kHead).next.load(std::memory_order_acquire);
  bool first = true;
  Key prev_key = 0;
  std::int64_t prev_ver = 0;
  while (cur != kEnd) {
    if (++steps > capacity_) return false;  // cycle
    const Key k = key_of(cur);
    const std::int64_t w = version_of(cur);
    if (!version_word::has_version(w)) return false;
    const std::int64_t v = version_word::number(w);
    if (k < min_key_) return false;
    if (limit != nullptr && k >= *limit) return false;
    if (!first && (k < prev_key || (k == prev_key && v >= prev_ver))) return false;
    first = false;
    prev_key = k;
    prev_ver = v;
    cur = entry(cur).next.load(std::memory_order_acquire);
  }
  return true;
}

Chunk* Chunk::next_chunk() const { return unmark(next_.load(std::memory_order_acquire)); }

bool Chunk::try_set_replacement(Chunk* first) {
  Chunk* expected = nullptr;
  return replacement_.compare_exchange_strong(expected, first, std::memory_order_seq_cst);
}

}  // namespace kiwi
