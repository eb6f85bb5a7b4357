#include <stdexcept>
#include <string>

#include "kiwi/bench/map_impl.hpp"

namespace kiwi::bench {

std::string_view to_string(MapImplChoice c) { return c == MapImplChoice::kKiwi ? "kiwi" : "locked"; }

MapImplChoice parse_impl(std::string_view name) {
  if (name == "kiwi") return MapImplChoice::kKiwi;
  if (name == "locked") return MapImplChoice::kLocked;
  throw std::invalid_argument("unknown impl '" + std::string(name) + "'");
}

ThreadSlot LockedMap::register_thread() {
  std::lock_guard lock(mu_);
  return ThreadSlot(next_slot_++);
}

void LockedMap::put(ThreadSlot, Key key, MaybeValue value) {
  std::lock_guard lock(mu_);
  if (value) {
    map_.insert_or_assign(key, *value);
  } else {
    map_.erase(key);
  }
}

MaybeValue LockedMap::get(ThreadSlot, Key key) {
  std::lock_guard lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void LockedMap::scan(ThreadSlot, Key lo, Key hi, ScanResult& out) {
  if (lo > hi) return;
  std::lock_guard lock(mu_);
  for (auto it = map_.lower_bound(lo); it != map_.end() && it->first <= hi; ++it) out.emplace_back(*it);
}

std::optional<std::pair<std::int64_t, std::int64_t>> KiwiBenchMap::size_bounds() const {
  if (!map_.options().bounds_enabled) return std::nullopt;
  return std::pair{map_.size_lower_bound(), map_.size_upper_bound()};
}

std::unique_ptr<BenchMap> make_bench_map(MapImplChoice impl, std::size_t max_threads, bool bounds_enabled) {
  if (impl == MapImplChoice::kLocked) return std::make_unique<LockedMap>();
  MapOptions o;
  o.max_threads = max_threads;
  o.bounds_enabled = bounds_enabled;
  return std::make_unique<KiwiBenchMap>(o);
}

}  // namespace kiwi::bench
