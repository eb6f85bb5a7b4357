#include "kiwi/rebalance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kiwi {

void RebalancePolicy::validate() const {
  if (rebalance_prob_perc < 0 || rebalance_prob_perc > 100) {
    throw std::invalid_argument("rebalance_prob_perc must be within [0, 100]");
  }
  if (!(sorted_rebalance_ratio > 1.0)) throw std::invalid_argument("sorted_rebalance_ratio must exceed 1");
  if (!(fill_factor > 0.0 && fill_factor <= 1.0)) throw std::invalid_argument("fill_factor must be within (0, 1]");
}

bool check_rebalance(std::int64_t sorted_prefix_len, std::int64_t list_length, bool full,
                     const RebalancePolicy& policy, RebalanceRng& rng) {
  if (full) return true;
  if (static_cast<double>(sorted_prefix_len) * policy.sorted_rebalance_ratio >= static_cast<double>(list_length)) {
    return false;
  }
  std::uniform_int_distribution<int> percent(0, 99);
  return percent(rng) < policy.rebalance_prob_perc;
}

bool check_rebalance(const Chunk& chunk, const RebalancePolicy& policy, RebalanceRng& rng) {
  return check_rebalance(chunk.sorted_prefix_len(), chunk.allocated(), chunk.full(), policy, rng);
}

void freeze_chunk(Chunk& chunk) {
  chunk.set_frozen();
  chunk.mark_next();
  const auto cap = static_cast<OrderIndex>(chunk.capacity());
  for (OrderIndex i = 1; i <= cap; ++i) chunk.try_freeze_entry(i);
}

void help_frozen_chunk_puts(Chunk& chunk, const ListContext& ctx) {
  const std::int32_t n = chunk.allocated();
  for (OrderIndex i = 1; i <= n; ++i) {
    if (!version_word::is_pending(chunk.version_of(i))) continue;
    chunk.add_to_linked_list(i, ctx);
    chunk.commit(i);
  }
}

std::vector<CompactedItem> compact_items(const Chunk& chunk, std::int64_t min_active_scan) {
  const std::vector<ListItem> items = chunk.list_items();
  std::vector<CompactedItem> out;
  out.reserve(items.size());

  std::size_t g = 0;
  while (g < items.size()) {
    std::size_t end = g;
    while (end < items.size() && items[end].key == items[g].key) ++end;

    const ListItem& newest = items[g];
    const bool purge = data_index::is_tombstone(newest.data_index) && newest.version <= min_active_scan;
    if (!purge) {
      for (std::size_t i = g; i < end; ++i) {
        out.push_back({items[i].key, items[i].version, chunk.value_of(items[i].data_index)});
        if (items[i].version <= min_active_scan) break;
      }
    }
    g = end;
  }
  return out;
}

std::vector<std::unique_ptr<Chunk>> copy_compact(const Chunk& chunk, std::int64_t min_active_scan,
                                                 const CompactionShape& shape) {
  const std::vector<CompactedItem> items = compact_items(chunk, min_active_scan);
  const auto target = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(shape.max_items) * shape.fill_factor)));

  std::vector<std::unique_ptr<Chunk>> out;
  auto emit = [&](std::size_t from, std::size_t to) {
    const Key min_key = out.empty() ? chunk.min_key() : items[from].key;
    const std::size_t n = to - from;
    const std::span<const CompactedItem> part(items.data() + from, n);
    out.push_back(std::make_unique<Chunk>(min_key, std::max(shape.max_items, n), shape.max_threads, part,
                                          shape.birth));
  };

  std::size_t start = 0;
  std::size_t g = 0;
  while (g < items.size()) {
    std::size_t end = g;
    while (end < items.size() && items[end].key == items[g].key) ++end;
    if (end - start > target && g > start) {
      emit(start, g);
      start = g;
    }
    g = end;
  }
  if (start < items.size() || out.empty()) emit(start, items.size());
  return out;
}

void copy_range(const Chunk& chunk, Key lo, Key hi, std::int64_t scan_version,
                std::span<const PendingItem> pending, std::vector<std::pair<Key, Value>>& out) {
  if (lo > hi) return;

  struct Candidate {
    Key key;
    std::int64_t version;
    std::int64_t data;
  };
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.version != b.version) return a.version > b.version;
    return data_index::slot_of(a.data) > data_index::slot_of(b.data);
  };

  std::vector<Candidate> extra;
  for (const PendingItem& p : pending) {
    if (p.version > scan_version) continue;
    const Key k = chunk.key_of(p.index);
    if (k < lo || k > hi) continue;
    extra.push_back({k, p.version, chunk.data_index_of(p.index)});
  }
  std::sort(extra.begin(), extra.end(), [&](const Candidate& a, const Candidate& b) {
    return a.key != b.key ? a.key < b.key : better(a, b);
  });

  std::size_t j = 0;
  OrderIndex cur = chunk.lower_bound(lo).next;
  for (;;) {
    const bool list_has = cur != kEnd && chunk.key_of(cur) <= hi;
    const bool extra_has = j < extra.size();
    if (!list_has && !extra_has) break;

    Key k;
    if (list_has && extra_has) {
      k = std::min(chunk.key_of(cur), extra[j].key);
    } else {
      k = list_has ? chunk.key_of(cur) : extra[j].key;
    }

    bool found = false;
    Candidate best{k, 0, 0};
    while (cur != kEnd && chunk.key_of(cur) == k) {
      const std::int64_t v = version_word::number(chunk.version_of(cur));
      if (!found && v <= scan_version) {
        found = true;
        best = {k, v, chunk.data_index_of(cur)};
      }
      cur = chunk.entry(cur).next.load(std::memory_order_acquire);
    }
    for (; j < extra.size() && extra[j].key == k; ++j) {
      if (!found || better(extra[j], best)) {
        found = true;
        best = extra[j];
      }
    }
    if (found && !data_index::is_tombstone(best.data)) out.emplace_back(k, *chunk.value_of(best.data));
  }
}

}  // namespace kiwi
