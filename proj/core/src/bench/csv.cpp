#include "kiwi/bench/csv.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace kiwi::bench {

std::string format_csv(std::span<const MeasurementResult> results) {
  struct Row {
    std::string workload;
    std::string impl;
    std::uint32_t threads;
    std::string kind;
    double mean;
    double stddev;
    int iterations;
  };
  std::vector<Row> rows;
  for (const auto& r : results) {
    for (const auto& [kind, s] : r.kinds) rows.push_back({r.workload, r.impl, r.threads, kind, s.mean, s.stddev, r.iterations});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.workload, a.impl, a.threads, a.kind) < std::tie(b.workload, b.impl, b.threads, b.kind);
  });
  std::ostringstream out;
  out << kCsvHeader << '\n' << std::fixed << std::setprecision(2);
  for (const auto& row : rows) {
    out << row.workload << ',' << row.impl << ',' << row.threads << ',' << row.kind << ',' << row.mean << ','
        << row.stddev << ',' << row.iterations << '\n';
  }
  return out.str();
}

void emit_results(std::span<const MeasurementResult> results, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << format_csv(results);
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace kiwi::bench
