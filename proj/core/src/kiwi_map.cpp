#include "kiwi/kiwi_map.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace kiwi {

namespace {

MapOptions checked(MapOptions o) {
  if (o.max_threads == 0) throw std::invalid_argument("max_threads must be positive");
  if (o.max_items < 2) throw std::invalid_argument("max_items must be at least 2");
  o.policy.validate();
  return o;
}

}  // namespace

KiwiMap::KiwiMap(MapOptions options)
    : options_(checked(options)),
      reclaimer_(options_.max_threads),
      bounds_(options_.max_threads, options_.bounds_enabled),
      psa_(std::make_unique<std::atomic<std::int64_t>[]>(options_.max_threads)),
      locals_(std::make_unique<SlotLocal[]>(options_.max_threads)) {
  auto* first = new Chunk(kMinKey, options_.max_items, options_.max_threads);
  head_.store(reinterpret_cast<std::uintptr_t>(first));
  index_ = std::make_unique<ChunkIndex>(first);
  for (std::size_t i = 0; i < options_.max_threads; ++i) {
    psa_[i].store(kNoActiveScan, std::memory_order_relaxed);
    locals_[i].rng.seed(static_cast<RebalanceRng::result_type>(options_.seed + i + 1));
  }
}

KiwiMap::~KiwiMap() {
  Chunk* c = Chunk::unmark(head_.load());
  while (c != nullptr) {
    Chunk* n = c->next_chunk();
    delete c;
    c = n;
  }
  index_.reset();
}

ThreadSlot KiwiMap::register_thread() {
  std::size_t n = registered_.load();
  do {
    if (n >= options_.max_threads) {
      throw RegistrationError("thread slots exhausted (max_threads = " + std::to_string(options_.max_threads) +
                              ")");
    }
  } while (!registered_.compare_exchange_weak(n, n + 1));
  return ThreadSlot(static_cast<std::uint32_t>(n));
}

Chunk* KiwiMap::locate(Key key, std::uint64_t cutoff) const {
  Chunk* c = index_->lookup(key);
  if (c == nullptr) c = Chunk::unmark(head_.load(std::memory_order_acquire));
  for (;;) {
    // A replacement born after `cutoff` was installed after the caller's
    // linearization point, so the retired chunk is still a valid view.
    Chunk* r = c->replacement();
    if (r != nullptr && r->birth() <= cutoff) {
      c = r;
      continue;
    }
    Chunk* n = c->next_chunk();
    if (n != nullptr && n->min_key() <= key) {
      c = n;
      continue;
    }
    return c;
  }
}

Chunk* KiwiMap::find_chunk(Key key) const { return locate(key, kFollowAll); }

void KiwiMap::put(ThreadSlot slot, Key key, MaybeValue value) {
  auto guard = reclaimer_.pin_scope(slot);
  const bool tombstone = !value.has_value();

  for (;;) {
    Chunk* c = locate(key, kFollowAll);
    if (c->frozen()) {
      rebalance(slot, c);
      continue;
    }
    const OrderIndex i = c->allocate();
    if (i == kEnd) {
      rebalance(slot, c);
      continue;
    }
    c->init_entry(i, key, value);
    run_hook(slot, HookPoint::kPostAllocate);

    // Bounds move before the entry becomes visible through the PPA.
    bounds_.on_published(slot, tombstone);
    c->publish(slot, i);
    run_hook(slot, HookPoint::kPostPublish);

    const std::int64_t gv = global_version_.load(std::memory_order_seq_cst);
    run_hook(slot, HookPoint::kPreVersionCas);
    const std::int64_t w = c->assign_version(i, gv);
    if (version_word::is_frozen(w)) {
      // Frozen while unversioned: nobody has observed this entry.
      bounds_.on_undone(slot, tombstone);
      c->clear_ppa(slot);
      rebalance(slot, c);
      continue;
    }
    bounds_.on_versioned(slot);

    c->add_to_linked_list(i, list_context(slot));
    c->commit(i);
    c->clear_ppa(slot);

    if (check_rebalance(*c, options_.policy, locals_[slot.id()].rng)) rebalance(slot, c);
    return;
  }
}

MaybeValue KiwiMap::get(ThreadSlot slot, Key key) {
  auto guard = reclaimer_.pin_scope(slot);
  const std::uint64_t cutoff = birth_stamp_.load(std::memory_order_seq_cst);
  Chunk* c = locate(key, cutoff);
  std::vector<PendingItem>& pending = locals_[slot.id()].pending;
  pending.clear();
  c->help_pending_puts(key, key, global_version_.load(std::memory_order_seq_cst), pending);
  return c->newest_value(key, pending);
}

void KiwiMap::scan(ThreadSlot slot, Key min_key, Key max_key, ScanResult& out) {
  if (min_key > max_key) return;
  auto guard = reclaimer_.pin_scope(slot);
  std::atomic<std::int64_t>& psa = psa_[slot.id()];

  // Provisional entry first, so a rebalance that reads the PSA between the
  // increment and the final publish still retains what this scan needs.
  psa.store(global_version_.load(std::memory_order_seq_cst), std::memory_order_seq_cst);
  const std::int64_t scan_version = global_version_.fetch_add(1, std::memory_order_seq_cst);
  psa.store(scan_version, std::memory_order_seq_cst);
  const std::uint64_t cutoff = birth_stamp_.load(std::memory_order_seq_cst);

  std::vector<PendingItem>& pending = locals_[slot.id()].pending;
  Key cursor = min_key;
  Chunk* c = locate(min_key, cutoff);
  for (;;) {
    Chunk* n = c->next_chunk();
    const bool last = n == nullptr || n->min_key() > max_key;
    const Key upto = last ? max_key : n->min_key() - 1;

    pending.clear();
    c->help_pending_puts(cursor, upto, global_version_.load(std::memory_order_seq_cst), pending);
    copy_range(*c, cursor, upto, scan_version, pending, out);
    if (last) break;

    cursor = n->min_key();
    c = n;
    for (Chunk* r = c->replacement(); r != nullptr && r->birth() <= cutoff; r = c->replacement()) c = r;
  }
  psa.store(kNoActiveScan, std::memory_order_release);
}

ScanResult KiwiMap::scan(ThreadSlot slot, Key min_key, Key max_key) {
  ScanResult out;
  scan(slot, min_key, max_key, out);
  return out;
}

std::int64_t KiwiMap::min_active_scan_version() const {
  std::int64_t m = kNoActiveScan;
  for (std::size_t i = 0; i < options_.max_threads; ++i) m = std::min(m, psa_[i].load(std::memory_order_seq_cst));
  return m;
}

bool KiwiMap::rebalance(ThreadSlot slot, Chunk* chunk) {
  auto guard = reclaimer_.pin_scope(slot);
  bool won = false;
  std::vector<Chunk*> installed;

  if (chunk->replacement() == nullptr) {
    freeze_chunk(*chunk);
    help_frozen_chunk_puts(*chunk, list_context(slot));
    const std::int64_t min_active = min_active_scan_version();
    const std::uint64_t birth = birth_stamp_.fetch_add(1, std::memory_order_seq_cst) + 1;
    auto fresh = copy_compact(*chunk, min_active,
                              {options_.max_items, options_.policy.fill_factor, options_.max_threads, birth});
    for (std::size_t i = 0; i + 1 < fresh.size(); ++i) fresh[i]->set_next(fresh[i + 1].get());
    fresh.back()->set_next(chunk->next_chunk());
    // One reference for the chunk's own replacement, one for its parent's.
    for (auto& f : fresh) {
      f->retire_refs().store(2, std::memory_order_relaxed);
      f->set_pending_parent(chunk);
    }

    if (chunk->try_set_replacement(fresh.front().get())) {
      won = true;
      for (auto& f : fresh) installed.push_back(f.release());
    }
  }

  splice(slot, chunk);

  if (won) {
    // Cleared before the parent can be retired, so a reader of the pointer
    // always finds it pinned.
    for (Chunk* f : installed) f->set_pending_parent(nullptr);
    index_->update(slot, reclaimer_, installed);
    rebalances_.fetch_add(1, std::memory_order_relaxed);
    release_retire_ref(slot, chunk);
    for (Chunk* f : installed) release_retire_ref(slot, f);
  }
  return won;
}

std::atomic<std::uintptr_t>* KiwiMap::find_pred_link(Chunk* chunk, Chunk*& owner) {
  std::atomic<std::uintptr_t>* link = &head_;
  owner = nullptr;
  for (;;) {
    Chunk* cur = Chunk::unmark(link->load(std::memory_order_acquire));
    if (cur == chunk) return link;
    if (cur == nullptr || cur->min_key() > chunk->min_key()) return nullptr;
    owner = cur;
    link = &cur->next_link();
  }
}

void KiwiMap::splice(ThreadSlot slot, Chunk* chunk) {
  // Not yet linked: absence from the list would be mistaken for completion.
  if (Chunk* p = chunk->pending_parent()) splice(slot, p);
  Chunk* r = chunk->replacement();
  for (;;) {
    Chunk* owner = nullptr;
    std::atomic<std::uintptr_t>* link = find_pred_link(chunk, owner);
    if (link == nullptr) return;
    std::uintptr_t v = link->load(std::memory_order_seq_cst);
    if (Chunk::unmark(v) != chunk) continue;
    if (Chunk::is_marked(v)) {
      // The predecessor is being rebalanced; its replacement will inherit the
      // link to `chunk`, so finish that first.
      rebalance(slot, owner);
      continue;
    }
    if (link->compare_exchange_strong(v, reinterpret_cast<std::uintptr_t>(r), std::memory_order_seq_cst)) return;
  }
}

void KiwiMap::release_retire_ref(ThreadSlot slot, Chunk* chunk) {
  if (chunk->retire_refs().fetch_sub(1, std::memory_order_acq_rel) == 1) reclaimer_.retire(slot, chunk);
}

bool KiwiMap::force_rebalance(ThreadSlot slot, Key chunk_min_key) {
  auto guard = reclaimer_.pin_scope(slot);
  Chunk* c = find_chunk(chunk_min_key);
  if (c->min_key() != chunk_min_key) return false;
  return rebalance(slot, c);
}

bool KiwiMap::rebalance_at(ThreadSlot slot, Key key) {
  auto guard = reclaimer_.pin_scope(slot);
  return rebalance(slot, find_chunk(key));
}

std::vector<const Chunk*> KiwiMap::chunks() const {
  std::vector<const Chunk*> out;
  for (Chunk* c = Chunk::unmark(head_.load()); c != nullptr; c = c->next_chunk()) out.push_back(c);
  return out;
}

bool KiwiMap::validate() const {
  const auto all = chunks();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i + 1 < all.size()) {
      const Key limit = all[i + 1]->min_key();
      if (limit <= all[i]->min_key()) return false;
      if (!all[i]->list_is_well_formed(&limit)) return false;
    } else if (!all[i]->list_is_well_formed(nullptr)) {
      return false;
    }
    if (all[i]->replacement() != nullptr) return false;
  }
  return !all.empty() && all.front()->min_key() == kMinKey;
}

}  // namespace kiwi
