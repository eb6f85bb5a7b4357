#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kiwi/hooks.hpp"
#include "kiwi/kiwi_map.hpp"
#include "kiwi/lin/history.hpp"

namespace kiwi::lin {

/// Relative weights of generated operations.
struct OpMix {
  int put = 40;
  int remove = 20;
  int get = 25;
  int scan = 15;
  int size = 0;
  int is_empty = 0;

  std::string describe() const;
};

/// Randomized sleeps at put lifecycle points.
struct DelayProfile {
  std::vector<HookPoint> points{std::begin(kAllHookPoints), std::end(kAllHookPoints)};
  int probability_perc = 30;
  int max_delay_us = 100;

  std::string describe() const;
};

struct FuzzConfig {
  std::uint32_t threads = 2;
  /// Total operations across all threads.
  std::size_t ops = 40;
  /// Keys are drawn from [0, key_range).
  Key key_range = 8;
  OpMix mix{};
  DelayProfile delays{};
  std::uint64_t seed = 1;
  /// Chunk capacity of the map record_run builds; small values force rebalances.
  std::size_t max_items = 16;
};

/// Per-thread operation scripts for `cfg`, results unset. Depends only on the
/// config, so the same seed always yields the same scripts. Put values are
/// unique across the run.
std::vector<std::vector<Operation>> generate_ops(const FuzzConfig& cfg);

/// Runs the scripts against `map` with cfg.threads worker threads and delay
/// hooks installed, recording every operation. size/isEmpty calls that answer
/// Unknown are left out of the history. Installs a hook on `map`.
History record_run(KiwiMap& map, const FuzzConfig& cfg);

/// Builds a fresh map sized by cfg.max_items and records a run on it.
History record_run(const FuzzConfig& cfg);

/// Same scripts, executed against the sequential model behind one global
/// lock. Every such history is linearizable by construction.
History record_locked_run(const FuzzConfig& cfg);

}  // namespace kiwi::lin
