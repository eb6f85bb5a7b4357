#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kiwi/bench/map_impl.hpp"
#include "kiwi/bench/workload.hpp"

namespace kiwi::bench {

struct KindStats {
  /// ops/second for every iteration, in run order.
  std::vector<double> raw;
  /// Over retained iterations only.
  double mean = 0;
  double stddev = 0;
};

struct MeasurementResult {
  std::string workload;
  std::string impl;
  std::uint32_t threads = 0;
  int iterations = 0;
  /// Iteration left out of mean/stddev, if any.
  std::optional<std::size_t> dropped;
  /// Keyed by op kind: "get", "put" (deletes included), "scan".
  std::map<std::string, KindStats> kinds;

  /// GetOnly closed-world check: gets that disagreed with the prefill.
  std::uint64_t consistency_errors = 0;
  /// check_bounds: iterations whose quiescent bracket missed the true size.
  std::uint64_t bracket_violations = 0;
  /// Content of the final iteration's map after the run.
  std::int64_t final_size = 0;
  std::uint64_t final_digest = 0;
};

/// Index of the value furthest from the mean, or nullopt with fewer than
/// three values. Ties go to the earliest index.
std::optional<std::size_t> outlier_index(std::span<const double> values);

/// Fills mean/stddev of every kind, leaving out `result.dropped`. The
/// dropped iteration is chosen on total throughput.
void summarize(MeasurementResult& result);

MeasurementResult run_workload(const WorkloadConfig& cfg, MapImplChoice impl);

}  // namespace kiwi::bench
