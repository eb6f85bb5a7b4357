#include "kiwi/chunk_index.hpp"

#include <algorithm>

namespace kiwi {

ChunkIndex::ChunkIndex(Chunk* first) : current_(new Entries{{first->min_key(), first}}) {}

ChunkIndex::~ChunkIndex() { delete current_.load(); }

Chunk* ChunkIndex::lookup(Key key) const {
  const Entries* e = current_.load(std::memory_order_acquire);
  auto it = std::upper_bound(e->begin(), e->end(), key,
                             [](Key k, const std::pair<Key, Chunk*>& p) { return k < p.first; });
  if (it == e->begin()) return nullptr;
  return std::prev(it)->second;
}

void ChunkIndex::update(ThreadSlot slot, EpochReclaimer& reclaimer, std::span<Chunk* const> fresh) {
  for (;;) {
    Entries* cur = current_.load(std::memory_order_seq_cst);
    auto next = std::make_unique<Entries>();
    next->reserve(cur->size() + fresh.size());
    // Liveness is checked after loading `cur`: a retirement that lands later
    // also swaps the snapshot, which fails the CAS below.
    for (const auto& entry : *cur) {
      if (entry.second->replacement() == nullptr) next->push_back(entry);
    }
    for (Chunk* c : fresh) {
      if (c->replacement() != nullptr) continue;
      auto it = std::lower_bound(next->begin(), next->end(), c->min_key(),
                                 [](const std::pair<Key, Chunk*>& p, Key k) { return p.first < k; });
      if (it != next->end() && it->first == c->min_key()) {
        it->second = c;
      } else {
        next->insert(it, {c->min_key(), c});
      }
    }
    if (current_.compare_exchange_strong(cur, next.get(), std::memory_order_seq_cst)) {
      next.release();
      reclaimer.retire(slot, cur);
      return;
    }
  }
}

std::size_t ChunkIndex::size() const { return current_.load(std::memory_order_acquire)->size(); }

}  // namespace kiwi
