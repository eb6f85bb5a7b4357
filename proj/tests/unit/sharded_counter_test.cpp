#include <gtest/gtest.h>

#include <atomic>
#include <thread>
#include <vector>

#include "kiwi/sharded_counter.hpp"

namespace kiwi {
namespace {

TEST(ShardedCounter, SumsAllCells) {
  ShardedCounter c(4);
  c.add(ThreadSlot(0), 5);
  c.add(ThreadSlot(3), -2);
  c.increment(ThreadSlot(1));
  c.decrement(ThreadSlot(1));
  EXPECT_EQ(c.sum(), 3);
  EXPECT_EQ(c.relaxed_sum(), 3);
}

TEST(ShardedCounter, ConcurrentAddsAreNotLost) {
  constexpr int kThreads = 4;
  constexpr int kAdds = 100000;
  ShardedCounter c(kThreads);
  std::vector<std::thread> ts;
  for (int t = 0; t < kThreads; ++t) {
    ts.emplace_back([&, t] {
      for (int i = 0; i < kAdds; ++i) c.increment(ThreadSlot(static_cast<std::uint32_t>(t)));
    });
  }
  for (auto& t : ts) t.join();
  EXPECT_EQ(c.sum(), kThreads * kAdds);
}

// Paired +1/-1 by one writer: a snapshot never sees the +1 without the
// preceding -1 having been applied, so sum stays within [-1, 0].
TEST(ShardedCounter, SnapshotsStayWithinPairedRange) {
  ShardedCounter c(2);
  std::atomic<bool> stop{false};
  std::thread w([&] {
    while (!stop.load()) {
      c.decrement(ThreadSlot(0));
      c.increment(ThreadSlot(0));
    }
  });
  for (int i = 0; i < 20000; ++i) {
    const auto s = c.sum();
    ASSERT_GE(s, -1);
    ASSERT_LE(s, 0);
  }
  stop = true;
  w.join();
}

}  // namespace
}  // namespace kiwi
