#include "kiwi/lin/fuzz.hpp"

#include <algorithm>
#include <barrier>
#include <chrono>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "kiwi/lin/oracle.hpp"

namespace kiwi::lin {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t now_ns(Clock::time_point origin) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - origin).count();
}

HistoryMeta meta_for(const FuzzConfig& cfg) {
  return {cfg.seed, cfg.threads, cfg.mix.describe(), cfg.delays.describe()};
}

/// Runs each thread's script, calling `exec(thread, op)`; returns the merged
/// records. `exec` returns false to drop the record.
template <class Exec>
std::vector<OpRecord> run_scripts(const std::vector<std::vector<Operation>>& scripts, Exec&& exec) {
  const auto n = static_cast<std::ptrdiff_t>(scripts.size());
  std::vector<std::vector<OpRecord>> per_thread(scripts.size());
  std::barrier start(n);
  const Clock::time_point origin = Clock::now();
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < scripts.size(); ++t) {
    workers.emplace_back([&, t] {
      std::int64_t last = 0;
      start.arrive_and_wait();
      for (Operation op : scripts[t]) {
        OpRecord r;
        r.thread = static_cast<std::uint32_t>(t);
        r.invoke_ts = std::max(now_ns(origin), last);
        const bool keep = exec(t, op);
        r.response_ts = std::max(now_ns(origin), r.invoke_ts + 1);
        last = r.response_ts;
        r.op = std::move(op);
        if (keep) per_thread[t].push_back(std::move(r));
      }
    });
  }
  for (auto& w : workers) w.join();
  std::vector<OpRecord> all;
  for (auto& v : per_thread) std::move(v.begin(), v.end(), std::back_inserter(all));
  std::sort(all.begin(), all.end(), [](const OpRecord& a, const OpRecord& b) { return a.invoke_ts < b.invoke_ts; });
  return all;
}

}  // namespace

std::string OpMix::describe() const {
  std::ostringstream os;
  os << "put=" << put << ",remove=" << remove << ",get=" << get << ",scan=" << scan << ",size=" << size
     << ",isEmpty=" << is_empty;
  return os.str();
}

std::string DelayProfile::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < points.size(); ++i) os << (i ? "+" : "") << to_string(points[i]);
  os << "@" << probability_perc << "%<=" << max_delay_us << "us";
  return os.str();
}

std::vector<std::vector<Operation>> generate_ops(const FuzzConfig& cfg) {
  if (cfg.threads == 0) throw std::invalid_argument("threads must be positive");
  if (cfg.key_range <= 0) throw std::invalid_argument("key_range must be positive");
  const OpMix& m = cfg.mix;
  const std::vector<int> weights{m.put, m.remove, m.get, m.scan, m.size, m.is_empty};
  if (std::any_of(weights.begin(), weights.end(), [](int w) { return w < 0; }) ||
      std::all_of(weights.begin(), weights.end(), [](int w) { return w == 0; })) {
    throw std::invalid_argument("op mix weights must be non-negative and not all zero");
  }

  std::vector<std::vector<Operation>> scripts(cfg.threads);
  Value next_value = 1;
  for (std::uint32_t t = 0; t < cfg.threads; ++t) {
    std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ULL + t);
    std::discrete_distribution<int> pick(weights.begin(), weights.end());
    std::uniform_int_distribution<Key> key(0, cfg.key_range - 1);
    const std::size_t count = cfg.ops / cfg.threads + (t < cfg.ops % cfg.threads ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) {
      switch (pick(rng)) {
        case 0: scripts[t].push_back(PutOp{key(rng), next_value++}); break;
        case 1: scripts[t].push_back(PutOp{key(rng), kTombstone}); break;
        case 2: scripts[t].push_back(GetOp{key(rng), std::nullopt}); break;
        case 3: {
          Key a = key(rng);
          Key b = key(rng);
          if (a > b) std::swap(a, b);
          scripts[t].push_back(ScanOp{a, b, {}});
          break;
        }
        case 4: scripts[t].push_back(SizeOp{}); break;
        default: scripts[t].push_back(IsEmptyOp{}); break;
      }
    }
  }
  return scripts;
}

History record_run(KiwiMap& map, const FuzzConfig& cfg) {
  const auto scripts = generate_ops(cfg);
  const std::size_t slots = map.options().max_threads;
  auto rngs = std::make_unique<std::minstd_rand[]>(slots);
  for (std::size_t i = 0; i < slots; ++i) rngs[i].seed(static_cast<std::uint32_t>(cfg.seed + 7 * i + 1));

  const DelayProfile delays = cfg.delays;
  map.set_hook([&rngs, delays](ThreadSlot slot, HookPoint p) {
    if (delays.max_delay_us <= 0) return;
    if (std::find(delays.points.begin(), delays.points.end(), p) == delays.points.end()) return;
    auto& rng = rngs[slot.id()];
    if (static_cast<int>(rng() % 100) >= delays.probability_perc) return;
    std::this_thread::sleep_for(std::chrono::microseconds(1 + rng() % static_cast<unsigned>(delays.max_delay_us)));
  });

  std::vector<ThreadSlot> slot_of(scripts.size());
  for (auto& s : slot_of) s = map.register_thread();

  History h;
  h.meta = meta_for(cfg);
  h.records = run_scripts(scripts, [&](std::size_t t, Operation& op) {
    const ThreadSlot slot = slot_of[t];
    if (auto* p = std::get_if<PutOp>(&op)) {
      map.put(slot, p->key, p->value);
    } else if (auto* g = std::get_if<GetOp>(&op)) {
      g->result = map.get(slot, g->key);
    } else if (auto* s = std::get_if<ScanOp>(&op)) {
      s->result = map.scan(slot, s->lo, s->hi);
    } else if (auto* z = std::get_if<SizeOp>(&op)) {
      const SizeAnswer a = map.size();
      if (!a) return false;
      z->result = *a;
    } else {
      const EmptyAnswer a = map.is_empty();
      if (a == EmptyAnswer::kUnknown) return false;
      std::get<IsEmptyOp>(op).result = a == EmptyAnswer::kTrue;
    }
    return true;
  });
  map.set_hook({});
  return h;
}

History record_run(const FuzzConfig& cfg) {
  MapOptions o;
  o.max_threads = std::max<std::size_t>(cfg.threads, 1);
  o.max_items = cfg.max_items;
  o.seed = cfg.seed;
  KiwiMap map(o);
  return record_run(map, cfg);
}

History record_locked_run(const FuzzConfig& cfg) {
  const auto scripts = generate_ops(cfg);
  std::mutex mu;
  MapModel model;
  History h;
  h.meta = meta_for(cfg);
  h.records = run_scripts(scripts, [&](std::size_t, Operation& op) {
    std::lock_guard lock(mu);
    oracle_execute(model, op);
    return true;
  });
  return h;
}

}  // namespace kiwi::lin
