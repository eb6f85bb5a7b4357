#include "kiwi/epoch.hpp"

#include <algorithm>
#include <cassert>

namespace kiwi {

EpochReclaimer::EpochReclaimer(std::size_t slots, std::size_t collect_threshold)
    : threshold_(collect_threshold),
      slots_(std::make_unique<SlotState[]>(slots)),
      slot_count_(slots) {}

EpochReclaimer::~EpochReclaimer() {
  for (std::size_t i = 0; i < slot_count_; ++i) {
    for (const Retired& r : slots_[i].retired) r.deleter(r.object);
  }
}

void EpochReclaimer::pin(ThreadSlot slot) {
  SlotState& s = slots_[slot.id()];
  if (s.depth++ != 0) return;
  const std::uint64_t e = global_.load(std::memory_order_seq_cst);
  s.announce.store((e << 1) | 1U, std::memory_order_seq_cst);
  std::atomic_thread_fence(std::memory_order_seq_cst);
}

void EpochReclaimer::unpin(ThreadSlot slot) {
  SlotState& s = slots_[slot.id()];
  assert(s.depth > 0);
  if (--s.depth != 0) return;
  s.announce.store(0, std::memory_order_release);
}

void EpochReclaimer::retire(ThreadSlot slot, void* object, Deleter deleter) {
  SlotState& s = slots_[slot.id()];
  s.retired.push_back({object, deleter, global_.load(std::memory_order_seq_cst)});
  if (s.retired.size() >= threshold_) collect(slot);
}

bool EpochReclaimer::try_advance() {
  std::uint64_t e = global_.load(std::memory_order_seq_cst);
  for (std::size_t i = 0; i < slot_count_; ++i) {
    const std::uint64_t a = slots_[i].announce.load(std::memory_order_seq_cst);
    if ((a & 1U) != 0 && (a >> 1) != e) return false;
  }
  return global_.compare_exchange_strong(e, e + 1, std::memory_order_seq_cst);
}

void EpochReclaimer::collect(ThreadSlot slot) {
  try_advance();
  const std::uint64_t now = global_.load(std::memory_order_seq_cst);
  auto& list = slots_[slot.id()].retired;
  auto keep = std::partition(list.begin(), list.end(),
                             [now](const Retired& r) { return r.epoch + 2 > now; });
  for (auto it = keep; it != list.end(); ++it) it->deleter(it->object);
  list.erase(keep, list.end());
}

std::size_t EpochReclaimer::pending() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < slot_count_; ++i) n += slots_[i].retired.size();
  return n;
}

}  // namespace kiwi
