#include "kiwi/bench/workload.hpp"

#include <stdexcept>
#include <string>

namespace kiwi::bench {

std::string_view to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::kGetOnly: return "GetOnly";
    case WorkloadKind::kPutDelete5050: return "PutDelete5050";
    case WorkloadKind::kScanOnly32K: return "ScanOnly32K";
    case WorkloadKind::kHalfPutDeleteHalfScan: return "HalfPutDeleteHalfScan";
    case WorkloadKind::kCustom: return "Custom";
  }
  return "?";
}

WorkloadKind parse_workload(std::string_view name) {
  for (WorkloadKind k : {WorkloadKind::kGetOnly, WorkloadKind::kPutDelete5050, WorkloadKind::kScanOnly32K,
                         WorkloadKind::kHalfPutDeleteHalfScan, WorkloadKind::kCustom}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown workload '" + std::string(name) + "'");
}

void WorkloadConfig::validate() const {
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  if (key_range_max < 1) throw std::invalid_argument("key range must be positive");
  if (scan_span < 1) throw std::invalid_argument("scan span must be at least 1");
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (warmup_seconds < 0 || run_seconds <= 0) throw std::invalid_argument("durations must be positive");
  if (init_size > key_range_max) throw std::invalid_argument("init size exceeds the key range");
  if (kind == WorkloadKind::kCustom) {
    const ThreadMix& m = custom_mix;
    if (m.get < 0 || m.put < 0 || m.del < 0 || m.scan < 0 || m.get + m.put + m.del + m.scan == 0) {
      throw std::invalid_argument("custom mix weights must be non-negative and not all zero");
    }
  }
}

std::int64_t steady_state_init_size(std::int64_t r, int i_pct, int d_pct) {
  if (i_pct < 0 || d_pct < 0 || i_pct + d_pct <= 0) {
    throw std::invalid_argument("insert and delete percentages must be non-negative with a positive sum");
  }
  return r * i_pct / (i_pct + d_pct);
}

ThreadMix mix_for(const WorkloadConfig& cfg, std::uint32_t thread) {
  switch (cfg.kind) {
    case WorkloadKind::kGetOnly: return {100, 0, 0, 0};
    case WorkloadKind::kPutDelete5050: return {0, 50, 50, 0};
    case WorkloadKind::kScanOnly32K: return {0, 0, 0, 100};
    case WorkloadKind::kHalfPutDeleteHalfScan:
      if (cfg.threads == 1) return {0, 25, 25, 50};
      return thread % 2 == 0 ? ThreadMix{0, 50, 50, 0} : ThreadMix{0, 0, 0, 100};
    case WorkloadKind::kCustom: return cfg.custom_mix;
  }
  return {};
}

std::int64_t resolved_init_size(const WorkloadConfig& cfg) {
  if (cfg.init_size >= 0) return cfg.init_size;
  int put = 0;
  int del = 0;
  for (std::uint32_t t = 0; t < cfg.threads; ++t) {
    const ThreadMix m = mix_for(cfg, t);
    put += m.put;
    del += m.del;
  }
  if (put + del == 0) return steady_state_init_size(cfg.key_range_max, 50, 50);
  return steady_state_init_size(cfg.key_range_max, put, del);
}

}  // namespace kiwi::bench
