#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "kiwi/rebalance.hpp"

namespace kiwi {
namespace {

using ScanResult = std::vector<std::pair<Key, Value>>;

OrderIndex insert(Chunk& c, Key k, MaybeValue v, std::int64_t version) {
  const OrderIndex i = c.allocate();
  c.init_entry(i, k, v);
  c.assign_version(i, version);
  c.add_to_linked_list(i, {});
  c.commit(i);
  return i;
}

TEST(CheckRebalance, FullChunkAlwaysTriggers) {
  RebalancePolicy p;
  RebalanceRng rng(1);
  EXPECT_TRUE(check_rebalance(100, 100, true, p, rng));
}

TEST(CheckRebalance, PrefixAboveRatioNeverTriggers) {
  RebalancePolicy p;
  p.rebalance_prob_perc = 100;
  RebalanceRng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_FALSE(check_rebalance(100, 150, false, p, rng));
}

TEST(CheckRebalance, StalePrefixTriggersOnDraw) {
  RebalancePolicy p;
  p.rebalance_prob_perc = 100;
  RebalanceRng rng(1);
  EXPECT_TRUE(check_rebalance(100, 190, false, p, rng));
  p.rebalance_prob_perc = 0;
  EXPECT_FALSE(check_rebalance(100, 190, false, p, rng));
}

TEST(CheckRebalance, DrawRateMatchesProbability) {
  RebalancePolicy p;
  RebalanceRng rng(42);
  int hits = 0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) hits += check_rebalance(10, 100, false, p, rng) ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(hits) / kDraws, 0.02, 0.005);
}

TEST(RebalancePolicy, RejectsBadKnobs) {
  RebalancePolicy p;
  p.rebalance_prob_perc = 101;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.sorted_rebalance_ratio = 1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.fill_factor = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Freeze, FreezesUnversionedAndKeepsPending) {
  Chunk c(kMinKey, 8, 2);
  insert(c, 1, 1, 1);
  const OrderIndex none = c.allocate();
  c.init_entry(none, 2, 2);
  const OrderIndex pending = c.allocate();
  c.init_entry(pending, 3, 3);
  c.assign_version(pending, 4);

  freeze_chunk(c);
  EXPECT_TRUE(c.frozen());
  EXPECT_TRUE(Chunk::is_marked(c.next_link().load()));
  EXPECT_TRUE(version_word::is_frozen(c.version_of(none)));
  EXPECT_TRUE(version_word::is_pending(c.version_of(pending)));
  // Unallocated slots are frozen too, so late allocations cannot get a version.
  const OrderIndex late = c.allocate();
  c.init_entry(late, 9, 9);
  EXPECT_TRUE(version_word::is_frozen(c.assign_version(late, 5)));

  freeze_chunk(c);  // idempotent
  help_frozen_chunk_puts(c, {});
  EXPECT_TRUE(version_word::is_committed(c.version_of(pending)));
  EXPECT_EQ(c.list_length(), 2u);
  help_frozen_chunk_puts(c, {});
  EXPECT_EQ(c.list_length(), 2u);
}

TEST(Compact, KeepsNewestOnlyWithoutScans) {
  Chunk c(kMinKey, 8, 1);
  insert(c, 7, 1, 1);
  insert(c, 7, 2, 2);
  insert(c, 7, 3, 3);
  const auto items = compact_items(c, kNoActiveScan);
  EXPECT_EQ(items, (std::vector<CompactedItem>{{7, 3, 3}}));
}

TEST(Compact, RetainsWhatAnActiveScanNeeds) {
  Chunk c(kMinKey, 8, 1);
  insert(c, 7, 1, 1);
  insert(c, 7, 2, 2);
  insert(c, 7, 3, 3);
  const auto items = compact_items(c, 2);
  EXPECT_EQ(items, (std::vector<CompactedItem>{{7, 3, 3}, {7, 2, 2}}));
  // A scan at version 2 over the compacted chunk still reads v2's value.
  Chunk fresh(kMinKey, 8, 1, items, 1);
  ScanResult out;
  copy_range(fresh, 0, 10, 2, {}, out);
  EXPECT_EQ(out, (ScanResult{{7, 2}}));
}

TEST(Compact, PurgesDeadTombstones) {
  Chunk c(kMinKey, 8, 1);
  insert(c, 1, 10, 1);
  insert(c, 1, kTombstone, 2);
  insert(c, 2, 20, 1);
  EXPECT_EQ(compact_items(c, kNoActiveScan), (std::vector<CompactedItem>{{2, 1, 20}}));
  // A scan at version 1 still needs the old value behind the tombstone.
  EXPECT_EQ(compact_items(c, 1),
            (std::vector<CompactedItem>{{1, 2, std::nullopt}, {1, 1, 10}, {2, 1, 20}}));
}

TEST(CopyCompact, SplitsAtKeyBoundariesAndPartitionsRange) {
  Chunk c(-5, 256, 1);
  for (Key k = 0; k < 100; ++k) insert(c, k, k, 1);
  freeze_chunk(c);
  help_frozen_chunk_puts(c, {});
  const auto fresh = copy_compact(c, kNoActiveScan, {16, 0.5, 1, 9});
  ASSERT_GT(fresh.size(), 1u);
  EXPECT_EQ(fresh.front()->min_key(), -5);
  std::vector<Key> seen;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    const Chunk& f = *fresh[i];
    EXPECT_EQ(f.birth(), 9u);
    EXPECT_LE(f.sorted_prefix_len(), 8);
    EXPECT_EQ(static_cast<std::size_t>(f.sorted_prefix_len()), f.list_length());
    if (i + 1 < fresh.size()) {
      const Key limit = fresh[i + 1]->min_key();
      EXPECT_TRUE(f.list_is_well_formed(&limit));
    }
    for (const auto& it : f.list_items()) seen.push_back(it.key);
  }
  std::vector<Key> want(100);
  for (Key k = 0; k < 100; ++k) want[static_cast<std::size_t>(k)] = k;
  EXPECT_EQ(seen, want);
}

TEST(CopyCompact, NeverSplitsVersionsOfOneKey) {
  Chunk c(kMinKey, 256, 1);
  for (std::int64_t v = 1; v <= 20; ++v) insert(c, 3, v, v);
  insert(c, 4, 1, 1);
  const auto fresh = copy_compact(c, 0, {8, 0.5, 1, 1});
  ASSERT_EQ(fresh.size(), 2u);
  EXPECT_EQ(fresh[0]->list_length(), 20u);
  EXPECT_GE(fresh[0]->capacity(), 20u);
  EXPECT_EQ(fresh[1]->min_key(), 4);
}

TEST(CopyCompact, EmptyChunkYieldsOneEmptyChunk) {
  Chunk c(10, 8, 1);
  const auto fresh = copy_compact(c, kNoActiveScan, {8, 0.5, 1, 1});
  ASSERT_EQ(fresh.size(), 1u);
  EXPECT_EQ(fresh[0]->min_key(), 10);
  EXPECT_EQ(fresh[0]->list_length(), 0u);
}

TEST(CopyRange, Examples) {
  {
    Chunk c(kMinKey, 8, 1);
    ScanResult out;
    copy_range(c, kMinKey, kMaxKey, 100, {}, out);
    EXPECT_TRUE(out.empty());
  }
  {
    Chunk c(kMinKey, 8, 1);
    insert(c, 1, 'a', 5);
    insert(c, 1, 'b', 3);
    ScanResult out;
    copy_range(c, 0, 10, 4, {}, out);
    EXPECT_EQ(out, (ScanResult{{1, 'b'}}));
  }
  {
    Chunk c(kMinKey, 8, 1);
    insert(c, 1, 'c', 2);
    const OrderIndex p = c.allocate();
    c.init_entry(p, 1, 'd');
    c.assign_version(p, 3);
    ScanResult out;
    copy_range(c, 0, 10, 9, std::vector<PendingItem>{{p, 3}}, out);
    EXPECT_EQ(out, (ScanResult{{1, 'd'}}));
  }
}

// Independent oracle: filter the raw entry set by version, pick the newest
// per key by (version, allocation slot), drop tombstones.
ScanResult brute_force_range(const std::vector<std::tuple<Key, std::int64_t, std::int64_t, MaybeValue>>& entries,
                             Key lo, Key hi, std::int64_t scan_version) {
  std::map<Key, std::tuple<std::int64_t, std::int64_t, MaybeValue>> best;
  for (const auto& [k, ver, slot, v] : entries) {
    if (k < lo || k > hi || ver > scan_version) continue;
    auto it = best.find(k);
    if (it == best.end() || std::tie(ver, slot) > std::tie(std::get<0>(it->second), std::get<1>(it->second))) {
      best[k] = {ver, slot, v};
    }
  }
  ScanResult out;
  for (const auto& [k, b] : best) {
    if (std::get<2>(b)) out.emplace_back(k, *std::get<2>(b));
  }
  return out;
}

TEST(CopyRange, MatchesBruteForceOnRandomChunks) {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 1000; ++round) {
    Chunk c(kMinKey, 64, 4);
    std::vector<std::tuple<Key, std::int64_t, std::int64_t, MaybeValue>> entries;
    std::vector<PendingItem> pending;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int e = 0; e < n; ++e) {
      const Key k = static_cast<Key>(rng() % 12);
      const std::int64_t ver = 1 + static_cast<std::int64_t>(rng() % 8);
      const MaybeValue v = rng() % 4 == 0 ? kTombstone : MaybeValue(static_cast<Value>(rng() % 1000));
      const OrderIndex i = c.allocate();
      c.init_entry(i, k, v);
      c.assign_version(i, ver);
      if (rng() % 4 == 0) {
        pending.push_back({i, ver});  // versioned, not yet linked
      } else {
        c.add_to_linked_list(i, {});
        c.commit(i);
      }
      // Same (key, version) folds by slot in both the chunk and the oracle.
      entries.emplace_back(k, ver, i, v);
    }
    const Key lo = static_cast<Key>(rng() % 12);
    const Key hi = lo + static_cast<Key>(rng() % 12);
    const std::int64_t sv = 1 + static_cast<std::int64_t>(rng() % 9);
    ScanResult got;
    copy_range(c, lo, hi, sv, pending, got);
    ASSERT_EQ(got, brute_force_range(entries, lo, hi, sv)) << "round " << round;
  }
}

}  // namespace
}  // namespace kiwi
