#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string_view>
#include <utility>

#include "kiwi/kiwi_map.hpp"

namespace kiwi::bench {

enum class MapImplChoice { kKiwi, kLocked };

std::string_view to_string(MapImplChoice c);
/// "kiwi" or "locked"; throws std::invalid_argument otherwise.
MapImplChoice parse_impl(std::string_view name);

/// What a benchmark drives. Each worker registers once and passes its slot.
class BenchMap {
 public:
  virtual ~BenchMap() = default;
  virtual ThreadSlot register_thread() = 0;
  virtual void put(ThreadSlot slot, Key key, MaybeValue value) = 0;
  virtual MaybeValue get(ThreadSlot slot, Key key) = 0;
  virtual void scan(ThreadSlot slot, Key lo, Key hi, ScanResult& out) = 0;
  /// (lower, upper) size bounds, when the implementation tracks them.
  virtual std::optional<std::pair<std::int64_t, std::int64_t>> size_bounds() const { return std::nullopt; }
};

/// A std::map behind one mutex: the scaling baseline.
class LockedMap final : public BenchMap {
 public:
  ThreadSlot register_thread() override;
  void put(ThreadSlot slot, Key key, MaybeValue value) override;
  MaybeValue get(ThreadSlot slot, Key key) override;
  void scan(ThreadSlot slot, Key lo, Key hi, ScanResult& out) override;

 private:
  std::mutex mu_;
  std::map<Key, Value> map_;
  std::uint32_t next_slot_ = 0;
};

class KiwiBenchMap final : public BenchMap {
 public:
  explicit KiwiBenchMap(MapOptions options) : map_(options) {}
  ThreadSlot register_thread() override { return map_.register_thread(); }
  void put(ThreadSlot slot, Key key, MaybeValue value) override { map_.put(slot, key, value); }
  MaybeValue get(ThreadSlot slot, Key key) override { return map_.get(slot, key); }
  void scan(ThreadSlot slot, Key lo, Key hi, ScanResult& out) override { map_.scan(slot, lo, hi, out); }
  std::optional<std::pair<std::int64_t, std::int64_t>> size_bounds() const override;

  KiwiMap& map() { return map_; }

 private:
  KiwiMap map_;
};

std::unique_ptr<BenchMap> make_bench_map(MapImplChoice impl, std::size_t max_threads, bool bounds_enabled);

}  // namespace kiwi::bench
