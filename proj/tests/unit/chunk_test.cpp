#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <barrier>
#include <map>
#include <random>
#include <thread>
#include <vector>

#include "kiwi/chunk.hpp"

namespace kiwi {
namespace {

// Runs one put through the chunk protocol by hand: allocate, init, version,
// link, commit.
OrderIndex insert(Chunk& c, Key k, MaybeValue v, std::int64_t version, const ListContext& ctx = {}) {
  const OrderIndex i = c.allocate();
  EXPECT_NE(i, kEnd);
  c.init_entry(i, k, v);
  EXPECT_EQ(c.assign_version(i, version), version_word::pending(version));
  c.add_to_linked_list(i, ctx);
  c.commit(i);
  return i;
}

TEST(Chunk, AllocateUntilFull) {
  Chunk c(kMinKey, 4, 1);
  EXPECT_EQ(c.allocated(), 0);
  for (OrderIndex want = 1; want <= 4; ++want) EXPECT_EQ(c.allocate(), want);
  EXPECT_TRUE(c.full());
  EXPECT_EQ(c.allocate(), kEnd);
  EXPECT_EQ(c.allocated(), 4);
}

TEST(Chunk, ConcurrentAllocationHandsOutEachSlotOnce) {
  constexpr int kCap = 4000;
  Chunk c(kMinKey, kCap, 4);
  std::vector<std::vector<OrderIndex>> got(4);
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t) {
    ts.emplace_back([&, t] {
      for (OrderIndex i = c.allocate(); i != kEnd; i = c.allocate()) got[t].push_back(i);
    });
  }
  for (auto& t : ts) t.join();
  std::vector<OrderIndex> all;
  for (auto& g : got) all.insert(all.end(), g.begin(), g.end());
  std::sort(all.begin(), all.end());
  ASSERT_EQ(all.size(), static_cast<std::size_t>(kCap));
  for (int i = 0; i < kCap; ++i) EXPECT_EQ(all[i], i + 1);
}

TEST(Chunk, FindInsertionLocationOnEmptyList) {
  Chunk c(kMinKey, 8, 1);
  EXPECT_EQ(c.find_insertion_location(5, 1), (InsertionLocation{kHead, kEnd}));
}

TEST(Chunk, HigherVersionGoesFirst) {
  Chunk c(kMinKey, 8, 1);
  const OrderIndex v2 = insert(c, 5, 1, 2);
  EXPECT_EQ(c.find_insertion_location(5, 3), (InsertionLocation{kHead, v2}));
  // Same version: next is the equal entry, which selects the overwrite path.
  EXPECT_EQ(c.find_insertion_location(5, 2), (InsertionLocation{kHead, v2}));
  EXPECT_EQ(c.find_insertion_location(5, 1), (InsertionLocation{v2, kEnd}));
}

TEST(Chunk, ListStaysSortedByKeyThenVersionDesc) {
  Chunk c(kMinKey, 64, 1);
  std::mt19937 rng(3);
  for (int i = 0; i < 40; ++i) insert(c, static_cast<Key>(rng() % 10), i, 1 + static_cast<std::int64_t>(rng() % 5 + i * 5));
  EXPECT_TRUE(c.list_is_well_formed());
  EXPECT_EQ(c.list_length(), 40u);
}

TEST(Chunk, SameKeyVersionFoldsIntoOverwrite) {
  Chunk c(kMinKey, 8, 1);
  const OrderIndex first = insert(c, 5, 10, 2);
  const OrderIndex second = c.allocate();
  c.init_entry(second, 5, 20);
  c.assign_version(second, 2);
  const InsertOutcome o = c.add_to_linked_list(second, {});
  EXPECT_EQ(o.kind, InsertOutcome::Kind::kOverwrite);
  EXPECT_TRUE(o.performed_cas);
  EXPECT_EQ(o.old_data_index, first);
  EXPECT_EQ(c.list_length(), 1u);
  EXPECT_EQ(c.newest_value(5, {}), MaybeValue(20));
}

TEST(Chunk, OverwriteDataIndexIsMonotonic) {
  Chunk c(kMinKey, 16, 1);
  const OrderIndex i = insert(c, 1, 0, 1);
  c.entry(i).data_index.store(3);
  auto r = c.overwrite_data_index(i, 7);
  EXPECT_TRUE(r.performed);
  EXPECT_EQ(r.old, 3);
  r = c.overwrite_data_index(i, 3);
  EXPECT_FALSE(r.performed);
  EXPECT_EQ(c.data_index_of(i), 7);
  // A tombstone from slot 9 is newer than the value at slot 7.
  r = c.overwrite_data_index(i, data_index::tombstone_for(9));
  EXPECT_TRUE(r.performed);
  EXPECT_EQ(c.newest_value(1, {}), std::nullopt);
}

TEST(Chunk, RacingOverwritesEndAtMaximum) {
  for (int round = 0; round < 200; ++round) {
    Chunk c(kMinKey, 16, 2);
    const OrderIndex i = insert(c, 1, 0, 1);
    c.entry(i).data_index.store(1);
    std::atomic<int> performed{0};
    std::barrier sync(2);
    auto racer = [&](std::int64_t target) {
      sync.arrive_and_wait();
      if (c.overwrite_data_index(i, target).performed) performed.fetch_add(1);
    };
    std::thread a(racer, 5);
    std::thread b(racer, 9);
    a.join();
    b.join();
    EXPECT_EQ(c.data_index_of(i), 9);
    EXPECT_GE(performed.load(), 1);
  }
}

TEST(Chunk, HelpPendingPutsAssignsVersionsInRange) {
  Chunk c(kMinKey, 8, 3);
  const OrderIndex a = c.allocate();
  c.init_entry(a, 5, 1);
  c.publish(ThreadSlot(0), a);
  const OrderIndex b = c.allocate();
  c.init_entry(b, 50, 2);
  c.publish(ThreadSlot(1), b);

  std::vector<PendingItem> out;
  c.help_pending_puts(0, 10, 12, out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].index, a);
  EXPECT_EQ(out[0].version, 12);
  EXPECT_EQ(c.version_of(a), version_word::pending(12));
  EXPECT_EQ(c.version_of(b), version_word::kNone);

  out.clear();
  c.clear_ppa(ThreadSlot(0));
  c.clear_ppa(ThreadSlot(1));
  c.help_pending_puts(kMinKey, kMaxKey, 13, out);
  EXPECT_TRUE(out.empty());
}

TEST(Chunk, HelpSkipsFrozenEntries) {
  Chunk c(kMinKey, 8, 1);
  const OrderIndex a = c.allocate();
  c.init_entry(a, 5, 1);
  c.publish(ThreadSlot(0), a);
  EXPECT_TRUE(c.try_freeze_entry(a));
  std::vector<PendingItem> out;
  c.help_pending_puts(kMinKey, kMaxKey, 3, out);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(c.assign_version(a, 4), version_word::kFrozen);
}

TEST(Chunk, OwnerAdoptsHelpersVersion) {
  Chunk c(kMinKey, 8, 2);
  const OrderIndex a = c.allocate();
  c.init_entry(a, 5, 1);
  c.publish(ThreadSlot(0), a);
  std::vector<PendingItem> out;
  c.help_pending_puts(kMinKey, kMaxKey, 7, out);
  EXPECT_EQ(c.assign_version(a, 9), version_word::pending(7));
}

// Older list entry, newer PPA entry (or vice versa): newest by (version, slot).
TEST(Chunk, NewestValueMergesListAndPending) {
  Chunk c(kMinKey, 8, 2);
  insert(c, 4, 100, 2);
  const OrderIndex p = c.allocate();
  c.init_entry(p, 4, 200);
  c.assign_version(p, 3);
  EXPECT_EQ(c.newest_value(4, std::vector<PendingItem>{{p, 3}}), MaybeValue(200));
  EXPECT_EQ(c.newest_value(4, {}), MaybeValue(100));

  // PPA-only key.
  const OrderIndex q = c.allocate();
  c.init_entry(q, 6, 300);
  c.assign_version(q, 3);
  EXPECT_EQ(c.newest_value(6, std::vector<PendingItem>{{q, 3}}), MaybeValue(300));
  EXPECT_EQ(c.newest_value(6, {}), std::nullopt);
}

TEST(Chunk, TombstoneInsertedForAbsentKey) {
  Chunk c(kMinKey, 8, 1);
  insert(c, 3, kTombstone, 1);
  EXPECT_EQ(c.list_length(), 1u);
  EXPECT_EQ(c.newest_value(3, {}), std::nullopt);
}

TEST(Chunk, CompactedConstructorBuildsSortedPrefix) {
  std::vector<CompactedItem> items{{1, 5, 10}, {1, 3, 11}, {4, 2, std::nullopt}, {9, 1, 12}};
  Chunk c(0, 8, 1, items, 7);
  EXPECT_EQ(c.sorted_prefix_len(), 4);
  EXPECT_EQ(c.birth(), 7u);
  EXPECT_EQ(c.allocated(), 4);
  EXPECT_TRUE(c.list_is_well_formed());
  EXPECT_EQ(c.newest_value(1, {}), MaybeValue(10));
  EXPECT_EQ(c.newest_value(4, {}), std::nullopt);
  // Binary search over the prefix routes new inserts correctly.
  insert(c, 5, 13, 8);
  insert(c, 0, 14, 8);
  insert(c, 1, 15, 8);
  EXPECT_TRUE(c.list_is_well_formed());
  EXPECT_EQ(c.newest_value(1, {}), MaybeValue(15));
  const auto items_after = c.list_items();
  std::vector<Key> keys;
  for (const auto& it : items_after) keys.push_back(it.key);
  EXPECT_EQ(keys, (std::vector<Key>{0, 1, 1, 1, 4, 5, 9}));
}

TEST(Chunk, ConcurrentDistinctInsertsStaySorted) {
  constexpr int kThreads = 4;
  constexpr int kPer = 500;
  Chunk c(kMinKey, kThreads * kPer, kThreads);
  std::vector<std::thread> ts;
  for (int t = 0; t < kThreads; ++t) {
    ts.emplace_back([&, t] {
      std::mt19937 rng(t);
      for (int i = 0; i < kPer; ++i) {
        const OrderIndex idx = c.allocate();
        c.init_entry(idx, static_cast<Key>(rng() % 1000), i);
        c.assign_version(idx, 1 + t * kPer + i);
        c.add_to_linked_list(idx, {nullptr, ThreadSlot(static_cast<std::uint32_t>(t)), nullptr});
        c.commit(idx);
      }
    });
  }
  for (auto& t : ts) t.join();
  EXPECT_TRUE(c.list_is_well_formed());
  EXPECT_EQ(c.list_length(), static_cast<std::size_t>(kThreads * kPer));
}

// Two threads link the same entry (owner and helper): it appears once.
TEST(Chunk, CoInsertionOfOneEntryLinksItOnce) {
  for (int round = 0; round < 300; ++round) {
    Chunk c(kMinKey, 64, 2);
    for (int k = 0; k < 10; k += 2) insert(c, k, k, 1);
    const OrderIndex i = c.allocate();
    c.init_entry(i, 5, 55);
    c.assign_version(i, 2);
    std::atomic<int> inserts{0};
    std::barrier sync(2);
    auto link = [&](std::uint32_t slot) {
      sync.arrive_and_wait();
      const auto o = c.add_to_linked_list(i, {nullptr, ThreadSlot(slot), nullptr});
      if (o.kind == InsertOutcome::Kind::kInsert) inserts.fetch_add(1);
    };
    std::thread a(link, 0);
    std::thread b(link, 1);
    a.join();
    b.join();
    ASSERT_EQ(inserts.load(), 1);
    ASSERT_TRUE(c.list_is_well_formed());
    ASSERT_EQ(c.list_length(), 6u);
  }
}

}  // namespace
}  // namespace kiwi
