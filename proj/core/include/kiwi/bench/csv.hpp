#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "kiwi/bench/runner.hpp"

namespace kiwi::bench {

inline constexpr const char* kCsvHeader = "workload,impl,threads,op_kind,mean_ops_per_sec,stddev,iterations";

/// Header plus one row per (workload, impl, threads, op_kind), sorted on
/// those columns.
std::string format_csv(std::span<const MeasurementResult> results);

/// Writes format_csv to `path`; throws std::runtime_error naming the path.
void emit_results(std::span<const MeasurementResult> results, const std::filesystem::path& path);

}  // namespace kiwi::bench
