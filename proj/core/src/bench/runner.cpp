#include "kiwi/bench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

namespace kiwi::bench {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kGet = 0;
constexpr std::size_t kPut = 1;
constexpr std::size_t kScan = 2;
constexpr const char* kKindNames[] = {"get", "put", "scan"};

Value prefill_value(Key k) { return k * 2 + 1; }

struct Counts {
  std::uint64_t ops[3] = {0, 0, 0};
  std::uint64_t consistency_errors = 0;
};

/// Exactly `n` distinct keys from [0, range), uniformly (selection sampling).
std::vector<Key> choose_keys(Key range, std::int64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Key> keys;
  keys.reserve(static_cast<std::size_t>(n));
  std::int64_t needed = n;
  for (Key k = 0; k < range && needed > 0; ++k) {
    std::uniform_int_distribution<Key> d(0, range - k - 1);
    if (d(rng) < needed) {
      keys.push_back(k);
      --needed;
    }
  }
  return keys;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t phase, std::uint64_t thread) {
  std::seed_seq seq{seed, phase, thread};
  std::uint64_t out[1];
  seq.generate(reinterpret_cast<std::uint32_t*>(out), reinterpret_cast<std::uint32_t*>(out) + 2);
  return out[0];
}

struct Phase {
  BenchMap* map;
  const WorkloadConfig* cfg;
  std::uint64_t phase_id;
  double seconds;
  std::uint64_t ops_per_thread;
  bool slow;
  /// GetOnly closed-world membership; empty disables the check.
  const std::vector<bool>* prefilled;
};

/// Runs the op mix across cfg.threads workers; returns per-thread counts and
/// the timed window length in seconds.
std::pair<std::vector<Counts>, double> run_phase(const Phase& p) {
  const WorkloadConfig& cfg = *p.cfg;
  std::vector<Counts> counts(cfg.threads);
  std::vector<ThreadSlot> slots(cfg.threads);
  for (auto& s : slots) s = p.map->register_thread();

  std::atomic<bool> stop{false};
  std::barrier start(static_cast<std::ptrdiff_t>(cfg.threads) + 1);
  std::vector<std::thread> workers;
  for (std::uint32_t t = 0; t < cfg.threads; ++t) {
    workers.emplace_back([&, t] {
      const ThreadMix mix = mix_for(cfg, t);
      std::mt19937_64 rng(stream_seed(cfg.seed, p.phase_id, t));
      std::discrete_distribution<int> pick({static_cast<double>(mix.get), static_cast<double>(mix.put),
                                            static_cast<double>(mix.del), static_cast<double>(mix.scan)});
      std::uniform_int_distribution<Key> key(0, cfg.key_range_max - 1);
      std::uniform_int_distribution<Value> value(0, std::numeric_limits<std::int32_t>::max());
      ScanResult buf;
      Counts& c = counts[t];
      BenchMap& m = *p.map;
      start.arrive_and_wait();
      for (std::uint64_t i = 0;; ++i) {
        if (p.ops_per_thread != 0 ? i >= p.ops_per_thread : stop.load(std::memory_order_relaxed)) break;
        const int kind = pick(rng);
        const Key k = key(rng);
        switch (kind) {
          case 0: {
            const MaybeValue got = m.get(slots[t], k);
            if (p.prefilled != nullptr && !p.prefilled->empty()) {
              const MaybeValue want =
                  (*p.prefilled)[static_cast<std::size_t>(k)] ? MaybeValue(prefill_value(k)) : std::nullopt;
              if (got != want) ++c.consistency_errors;
            }
            ++c.ops[kGet];
            break;
          }
          case 1:
            m.put(slots[t], k, value(rng));
            ++c.ops[kPut];
            break;
          case 2:
            m.put(slots[t], k, kTombstone);
            ++c.ops[kPut];
            break;
          default:
            buf.clear();
            m.scan(slots[t], k, k + cfg.scan_span, buf);
            ++c.ops[kScan];
            break;
        }
        if (p.slow) std::this_thread::sleep_for(std::chrono::microseconds(200));
      }
    });
  }

  start.arrive_and_wait();
  const auto t0 = Clock::now();
  if (p.ops_per_thread == 0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(p.seconds));
    stop.store(true);
  }
  for (auto& w : workers) w.join();
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  return {std::move(counts), std::max(elapsed, 1e-9)};
}

void prefill(BenchMap& map, const std::vector<Key>& keys) {
  const ThreadSlot s = map.register_thread();
  for (Key k : keys) map.put(s, k, prefill_value(k));
}

ScanResult full_content(BenchMap& map) {
  const ThreadSlot s = map.register_thread();
  ScanResult out;
  map.scan(s, kMinKey, kMaxKey, out);
  return out;
}

std::uint64_t digest(const ScanResult& content) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& [k, v] : content) {
    for (std::uint64_t x : {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(v)}) {
      h ^= x;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace

std::optional<std::size_t> outlier_index(std::span<const double> values) {
  if (values.size() < 3) return std::nullopt;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::size_t worst = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (std::abs(values[i] - mean) > std::abs(values[worst] - mean)) worst = i;
  }
  return worst;
}

void summarize(MeasurementResult& result) {
  std::vector<double> totals;
  for (const auto& [kind, s] : result.kinds) {
    if (totals.size() < s.raw.size()) totals.resize(s.raw.size(), 0.0);
    for (std::size_t i = 0; i < s.raw.size(); ++i) totals[i] += s.raw[i];
  }
  result.dropped = outlier_index(totals);
  for (auto& [kind, s] : result.kinds) {
    std::vector<double> kept;
    for (std::size_t i = 0; i < s.raw.size(); ++i) {
      if (result.dropped != i) kept.push_back(s.raw[i]);
    }
    const double n = static_cast<double>(kept.size());
    s.mean = kept.empty() ? 0.0 : std::accumulate(kept.begin(), kept.end(), 0.0) / n;
    double sq = 0;
    for (double x : kept) sq += (x - s.mean) * (x - s.mean);
    s.stddev = kept.size() > 1 ? std::sqrt(sq / (n - 1)) : 0.0;
  }
}

MeasurementResult run_workload(const WorkloadConfig& cfg, MapImplChoice impl) {
  cfg.validate();
  const std::int64_t init = resolved_init_size(cfg);
  // Workers, the loader and the final content scan each take a slot.
  const std::size_t slots = cfg.threads + 2;

  MeasurementResult result;
  result.workload = std::string(to_string(cfg.kind));
  result.impl = std::string(to_string(impl));
  result.threads = cfg.threads;
  result.iterations = cfg.iterations;

  std::vector<std::uint32_t> kinds_used;
  for (std::uint32_t t = 0; t < cfg.threads; ++t) {
    const ThreadMix m = mix_for(cfg, t);
    if (m.get > 0) kinds_used.push_back(kGet);
    if (m.put + m.del > 0) kinds_used.push_back(kPut);
    if (m.scan > 0) kinds_used.push_back(kScan);
  }
  for (std::uint32_t k : kinds_used) result.kinds[kKindNames[k]];

  if (cfg.warmup_seconds > 0) {
    auto warm = make_bench_map(impl, slots, false);
    prefill(*warm, choose_keys(cfg.key_range_max, init, stream_seed(cfg.seed, 0, 0)));
    run_phase({warm.get(), &cfg, 0, cfg.warmup_seconds, 0, false, nullptr});
  }

  for (int it = 0; it < cfg.iterations; ++it) {
    const std::uint64_t phase_id = static_cast<std::uint64_t>(it) + 1;
    auto map = make_bench_map(impl, slots, cfg.check_bounds);
    const auto keys = choose_keys(cfg.key_range_max, init, stream_seed(cfg.seed, phase_id, 1u << 20));
    prefill(*map, keys);

    std::vector<bool> members;
    if (cfg.kind == WorkloadKind::kGetOnly) {
      members.assign(static_cast<std::size_t>(cfg.key_range_max), false);
      for (Key k : keys) members[static_cast<std::size_t>(k)] = true;
    }

    auto [counts, secs] =
        run_phase({map.get(), &cfg, phase_id, cfg.run_seconds, cfg.ops_per_thread, it == cfg.slow_iteration, &members});
    std::uint64_t per_kind[3] = {0, 0, 0};
    for (const Counts& c : counts) {
      for (int k = 0; k < 3; ++k) per_kind[k] += c.ops[k];
      result.consistency_errors += c.consistency_errors;
    }
    for (auto& [name, s] : result.kinds) {
      const std::size_t k = static_cast<std::size_t>(std::find(std::begin(kKindNames), std::end(kKindNames), name) -
                                                     std::begin(kKindNames));
      s.raw.push_back(static_cast<double>(per_kind[k]) / secs);
    }

    const bool last = it + 1 == cfg.iterations;
    if (cfg.check_bounds || last) {
      const ScanResult content = full_content(*map);
      const auto size = static_cast<std::int64_t>(content.size());
      if (cfg.check_bounds) {
        if (auto b = map->size_bounds(); b && (b->first > size || size > b->second)) ++result.bracket_violations;
      }
      if (last) {
        result.final_size = size;
        result.final_digest = digest(content);
      }
    }
  }

  summarize(result);
  return result;
}

}  // namespace kiwi::bench
