#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "kiwi/types.hpp"

namespace kiwi {

/// Epoch-based deferred reclamation over a fixed set of thread slots.
///
/// A thread pins the current global epoch for the duration of an operation.
/// An object retired while the global epoch is `e` is freed once the global
/// epoch reaches `e + 2`; the epoch only advances when every pinned thread has
/// observed the current value, so nothing retired after a reader pinned can be
/// freed before that reader unpins.
class EpochReclaimer {
 public:
  using Deleter = void (*)(void*);

  explicit EpochReclaimer(std::size_t slots, std::size_t collect_threshold = 64);
  ~EpochReclaimer();

  EpochReclaimer(const EpochReclaimer&) = delete;
  EpochReclaimer& operator=(const EpochReclaimer&) = delete;

  class Guard {
   public:
    Guard(EpochReclaimer& owner, ThreadSlot slot) : owner_(&owner), slot_(slot) {
      owner_->pin(slot_);
    }
    ~Guard() {
      if (owner_ != nullptr) owner_->unpin(slot_);
    }
    Guard(Guard&& other) noexcept : owner_(other.owner_), slot_(other.slot_) {
      other.owner_ = nullptr;
    }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;
    Guard& operator=(Guard&&) = delete;

   private:
    EpochReclaimer* owner_;
    ThreadSlot slot_;
  };

  Guard pin_scope(ThreadSlot slot) { return Guard(*this, slot); }

  /// Nested pins are allowed; only the outermost one publishes the epoch.
  void pin(ThreadSlot slot);
  void unpin(ThreadSlot slot);

  void retire(ThreadSlot slot, void* object, Deleter deleter);

  template <class T>
  void retire(ThreadSlot slot, T* object) {
    retire(slot, object, [](void* p) { delete static_cast<T*>(p); });
  }

  /// Tries to advance the epoch and frees whatever `slot` may now free.
  void collect(ThreadSlot slot);

  std::uint64_t epoch() const { return global_.load(std::memory_order_acquire); }

  /// Objects retired but not yet freed, summed over slots. Only meaningful
  /// when no thread is concurrently retiring.
  std::size_t pending() const;

 private:
  struct Retired {
    void* object;
    Deleter deleter;
    std::uint64_t epoch;
  };

  struct alignas(64) SlotState {
    std::atomic<std::uint64_t> announce{0};
    std::uint32_t depth = 0;
    std::vector<Retired> retired;
  };

  bool try_advance();

  std::atomic<std::uint64_t> global_{1};
  std::size_t threshold_;
  std::unique_ptr<SlotState[]> slots_;
  std::size_t slot_count_;
};

}  // namespace kiwi
