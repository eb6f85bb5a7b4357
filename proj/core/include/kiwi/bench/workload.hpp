#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "kiwi/types.hpp"

namespace kiwi::bench {

enum class WorkloadKind {
  kGetOnly,
  kPutDelete5050,
  kScanOnly32K,
  kHalfPutDeleteHalfScan,
  /// Every thread runs WorkloadConfig::custom_mix.
  kCustom,
};

std::string_view to_string(WorkloadKind k);
/// Throws std::invalid_argument for an unknown name.
WorkloadKind parse_workload(std::string_view name);

/// Per-thread operation weights. A delete is a put of a tombstone.
struct ThreadMix {
  int get = 0;
  int put = 0;
  int del = 0;
  int scan = 0;
};

struct WorkloadConfig {
  WorkloadKind kind = WorkloadKind::kGetOnly;
  ThreadMix custom_mix{};
  std::uint32_t threads = 1;
  /// Keys are drawn from [0, key_range_max).
  Key key_range_max = 2'000'000;
  /// Prefill size; negative derives it from the mix (steady_state_init_size).
  std::int64_t init_size = -1;
  Key scan_span = 32768;
  double warmup_seconds = 20;
  double run_seconds = 5;
  int iterations = 5;
  std::uint64_t seed = 1;
  /// When non-zero each thread runs exactly this many ops instead of a timed window.
  std::uint64_t ops_per_thread = 0;
  /// Enables size bounds and checks the quiescent bracket after each iteration.
  bool check_bounds = false;
  /// Test knob: iteration index whose workers sleep between operations.
  int slow_iteration = -1;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Expected map size once random inserts (i%) and deletes (d%) over a key
/// range of r balance out: r * i / (i + d), rounded down.
std::int64_t steady_state_init_size(std::int64_t r, int i_pct, int d_pct);

/// Mix run by `thread` under `cfg`.
ThreadMix mix_for(const WorkloadConfig& cfg, std::uint32_t thread);

/// cfg.init_size if set, otherwise the steady state of the aggregate put/delete
/// ratio, or half the range for read-only mixes.
std::int64_t resolved_init_size(const WorkloadConfig& cfg);

}  // namespace kiwi::bench
