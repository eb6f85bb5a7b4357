#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "kiwi/lin/checker.hpp"
#include "kiwi/lin/fuzz.hpp"
#include "kiwi/lin/oracle.hpp"
#include "test_histories.hpp"

namespace kiwi::lin {
namespace {

using kiwi::testing::bad_history_corpus;
using kiwi::testing::brute_force_linearizable;
using kiwi::testing::empty_rec;
using kiwi::testing::get_rec;
using kiwi::testing::make_history;
using kiwi::testing::put_rec;
using kiwi::testing::scan_rec;
using kiwi::testing::size_rec;

TEST(Oracle, Examples) {
  MapModel m;
  EXPECT_TRUE(oracle_apply(m, PutOp{1, 100}));
  EXPECT_EQ(m, (MapModel{{1, 100}}));
  EXPECT_TRUE(oracle_apply(m, GetOp{1, 100}));
  m[3] = 300;
  EXPECT_TRUE(oracle_apply(m, ScanOp{0, 2, {{1, 100}}}));
}

TEST(Oracle, MismatchLeavesStateUntouched) {
  MapModel m{{1, 100}};
  EXPECT_FALSE(oracle_apply(m, GetOp{1, 5}));
  EXPECT_FALSE(oracle_apply(m, GetOp{2, 5}));
  EXPECT_FALSE(oracle_apply(m, ScanOp{0, 9, {}}));
  EXPECT_FALSE(oracle_apply(m, SizeOp{2}));
  EXPECT_FALSE(oracle_apply(m, IsEmptyOp{true}));
  EXPECT_EQ(m, (MapModel{{1, 100}}));
  EXPECT_TRUE(oracle_apply(m, PutOp{1, kTombstone}));
  EXPECT_TRUE(m.empty());
  EXPECT_TRUE(oracle_apply(m, IsEmptyOp{true}));
  EXPECT_TRUE(oracle_apply(m, SizeOp{0}));
}

TEST(Oracle, ExecuteFillsResults) {
  MapModel m{{1, 10}, {4, 40}};
  Operation g = GetOp{4, std::nullopt};
  oracle_execute(m, g);
  EXPECT_EQ(std::get<GetOp>(g).result, MaybeValue(40));
  Operation s = ScanOp{0, 3, {}};
  oracle_execute(m, s);
  EXPECT_EQ(std::get<ScanOp>(s).result, (ScanResult{{1, 10}}));
  Operation n = SizeOp{};
  oracle_execute(m, n);
  EXPECT_EQ(std::get<SizeOp>(n).result, 2);
}

TEST(Checker, SequentialHistoryIsLinearizable) {
  const History h = make_history({put_rec(0, 1, 10, 0, 1), get_rec(0, 1, 10, 2, 3), put_rec(0, 2, 20, 4, 5),
                                  scan_rec(0, 0, 5, {{1, 10}, {2, 20}}, 6, 7), put_rec(0, 1, kTombstone, 8, 9),
                                  get_rec(0, 1, std::nullopt, 10, 11), size_rec(0, 1, 12, 13),
                                  empty_rec(0, false, 14, 15)});
  const CheckResult r = check_linearizable(h);
  EXPECT_EQ(r.verdict, Verdict::kLinearizable);
  EXPECT_EQ(r.order.size(), h.records.size());
}

TEST(Checker, StaleReadRejected) {
  const History h = make_history({put_rec(0, 1, 10, 0, 10), get_rec(1, 1, std::nullopt, 20, 30)});
  const CheckResult r = check_linearizable(h);
  EXPECT_EQ(r.verdict, Verdict::kNotLinearizable);
  EXPECT_NE(r.explain(h).find("get(1) -> null"), std::string::npos) << r.explain(h);
}

TEST(Checker, OverlappingPutsObservedInBothOrdersRejected) {
  const History h = make_history({put_rec(0, 1, 10, 0, 100), put_rec(1, 1, 20, 0, 100), get_rec(2, 1, 10, 110, 120),
                                  get_rec(2, 1, 20, 130, 140)});
  EXPECT_FALSE(brute_force_linearizable(h));
  EXPECT_EQ(check_linearizable(h).verdict, Verdict::kNotLinearizable);
}

TEST(Checker, ConcurrentReadMayGoEitherWay) {
  for (MaybeValue seen : {MaybeValue(10), MaybeValue(std::nullopt)}) {
    const History h = make_history({put_rec(0, 1, 10, 0, 100), get_rec(1, 1, seen, 50, 60)});
    EXPECT_EQ(check_linearizable(h).verdict, Verdict::kLinearizable);
  }
}

TEST(Checker, TouchingIntervalsAreOrdered) {
  const History h = make_history({put_rec(0, 1, 10, 0, 10), get_rec(1, 1, std::nullopt, 10, 20)});
  EXPECT_FALSE(brute_force_linearizable(h));
  EXPECT_EQ(check_linearizable(h).verdict, Verdict::kNotLinearizable);
}

TEST(Checker, BadCorpusRejected) {
  const auto corpus = bad_history_corpus();
  EXPECT_GE(corpus.size(), 6u);
  for (const auto& [name, h] : corpus) {
    EXPECT_FALSE(brute_force_linearizable(h)) << name;
    const CheckResult r = check_linearizable(h);
    EXPECT_EQ(r.verdict, Verdict::kNotLinearizable) << name;
    EXPECT_FALSE(r.stuck.empty()) << name;
  }
}

TEST(Checker, LockedRunsAccepted) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    FuzzConfig cfg;
    cfg.threads = 3;
    cfg.ops = 40;
    cfg.seed = seed;
    cfg.mix.size = 5;
    cfg.mix.is_empty = 5;
    const History h = record_locked_run(cfg);
    EXPECT_EQ(check_linearizable(h).verdict, Verdict::kLinearizable) << "seed " << seed;
  }
}

History random_small_history(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_ops(2, 6);
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_int_distribution<Key> key(0, 2);
  std::uniform_int_distribution<Value> value(0, 2);
  std::uniform_int_distribution<std::int64_t> ts(0, 20);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<OpRecord> recs;
  const int n = n_ops(rng);
  for (int i = 0; i < n; ++i) {
    const std::int64_t a = ts(rng);
    const std::int64_t b = a + 1 + ts(rng) / 4;
    const MaybeValue v = coin(rng) ? MaybeValue(value(rng)) : std::nullopt;
    const auto t = static_cast<std::uint32_t>(i);
    switch (kind(rng)) {
      case 0:
      case 1: recs.push_back(put_rec(t, key(rng), v, a, b)); break;
      case 2: recs.push_back(get_rec(t, key(rng), v, a, b)); break;
      case 3: {
        ScanResult got;
        for (Key k = 0; k <= 2; ++k) {
          if (coin(rng)) got.emplace_back(k, value(rng));
        }
        recs.push_back(scan_rec(t, 0, 2, got, a, b));
        break;
      }
      default: recs.push_back(size_rec(t, value(rng), a, b)); break;
    }
  }
  return make_history(std::move(recs));
}

TEST(Checker, AgreesWithBruteForce) {
  std::mt19937_64 rng(2024);
  int yes = 0;
  int no = 0;
  for (int i = 0; i < 3000; ++i) {
    const History h = random_small_history(rng);
    const bool want = brute_force_linearizable(h);
    const CheckResult r = check_linearizable(h);
    ASSERT_EQ(r.verdict == Verdict::kLinearizable, want) << to_jsonl(h);
    (want ? yes : no)++;
  }
  // Both outcomes are exercised.
  EXPECT_GT(yes, 100);
  EXPECT_GT(no, 100);
}

TEST(Checker, RecordOrderDoesNotMatter) {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    FuzzConfig cfg;
    cfg.seed = seed;
    History h = record_run(cfg);
    const Verdict v = check_linearizable(h).verdict;
    std::shuffle(h.records.begin(), h.records.end(), rng);
    EXPECT_EQ(check_linearizable(h).verdict, v);
  }
}

TEST(Checker, BudgetExhaustion) {
  FuzzConfig cfg;
  cfg.threads = 3;
  cfg.seed = 5;
  const History h = record_locked_run(cfg);
  const CheckResult full = check_linearizable(h);
  ASSERT_EQ(full.verdict, Verdict::kLinearizable);
  EXPECT_EQ(check_linearizable(h, 1).verdict, Verdict::kExhausted);
  // Any budget that covers the nodes the search needed gives the same answer.
  EXPECT_EQ(check_linearizable(h, full.nodes).verdict, Verdict::kLinearizable);
  EXPECT_EQ(check_linearizable(h, full.nodes - 1).verdict, Verdict::kExhausted);
}

TEST(Checker, MalformedHistoryThrows) {
  EXPECT_THROW(check_linearizable(make_history({put_rec(0, 1, 1, 5, 1)})), HistoryError);
}

}  // namespace
}  // namespace kiwi::lin
