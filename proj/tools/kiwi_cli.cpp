#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kiwi/bench/csv.hpp"
#include "kiwi/bench/runner.hpp"
#include "kiwi/lin/checker.hpp"
#include "kiwi/lin/fuzz.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotLinearizable = 1;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitExhausted = 3;

int report(const kiwi::lin::History& h, const kiwi::lin::CheckResult& r) {
  std::cout << r.explain(h) << '\n';
  switch (r.verdict) {
    case kiwi::lin::Verdict::kLinearizable: return kExitOk;
    case kiwi::lin::Verdict::kNotLinearizable: return kExitNotLinearizable;
    case kiwi::lin::Verdict::kExhausted: return kExitExhausted;
  }
  return kExitExhausted;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KiWi concurrent map: benchmarks and linearizability checks"};
  app.require_subcommand(1);

  std::string workload = "GetOnly";
  std::string impl = "kiwi";
  std::vector<std::uint32_t> threads{1};
  kiwi::bench::WorkloadConfig bench;
  std::string bench_out = "results.csv";
  auto* bench_cmd = app.add_subcommand("bench", "Run a throughput workload and write CSV");
  bench_cmd->add_option("--workload", workload, "GetOnly|PutDelete5050|ScanOnly32K|HalfPutDeleteHalfScan")
      ->capture_default_str();
  bench_cmd->add_option("--impl", impl, "kiwi|locked")->check(CLI::IsMember({"kiwi", "locked"}))->capture_default_str();
  bench_cmd->add_option("--threads", threads, "Thread counts; repeat for a sweep")->capture_default_str();
  bench_cmd->add_option("--key-range", bench.key_range_max, "Keys drawn from [0, R)")->capture_default_str();
  bench_cmd->add_option("--init-size", bench.init_size, "Prefill size (default: steady state)");
  bench_cmd->add_option("--scan-span", bench.scan_span)->capture_default_str();
  bench_cmd->add_option("--warmup", bench.warmup_seconds, "Warmup seconds")->capture_default_str();
  bench_cmd->add_option("--seconds", bench.run_seconds, "Seconds per iteration")->capture_default_str();
  bench_cmd->add_option("--iterations", bench.iterations)->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_flag("--check-bounds", bench.check_bounds, "Assert the size bracket after every iteration");
  bench_cmd->add_option("--out", bench_out)->capture_default_str();

  kiwi::lin::FuzzConfig fuzz;
  std::string fuzz_out = "history.jsonl";
  bool fuzz_check = false;
  std::uint64_t fuzz_budget = kiwi::lin::kDefaultNodeBudget;
  auto* fuzz_cmd = app.add_subcommand("fuzz", "Record a fuzzed concurrent history");
  fuzz_cmd->add_option("--threads", fuzz.threads)->check(CLI::Range(1u, 64u))->capture_default_str();
  fuzz_cmd->add_option("--ops", fuzz.ops, "Total operations")->capture_default_str();
  fuzz_cmd->add_option("--key-range", fuzz.key_range)->check(CLI::PositiveNumber)->capture_default_str();
  fuzz_cmd->add_option("--max-items", fuzz.max_items, "Chunk capacity")->check(CLI::Range(2, 1 << 20))->capture_default_str();
  fuzz_cmd->add_option("--seed", fuzz.seed)->capture_default_str();
  fuzz_cmd->add_option("--out", fuzz_out)->capture_default_str();
  fuzz_cmd->add_flag("--check", fuzz_check, "Check the recorded history");
  fuzz_cmd->add_option("--budget", fuzz_budget, "Checker node budget")->capture_default_str();

  std::string check_in;
  std::uint64_t check_budget = kiwi::lin::kDefaultNodeBudget;
  auto* check_cmd = app.add_subcommand("check", "Check a saved history for linearizability");
  check_cmd->add_option("--in", check_in)->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--budget", check_budget, "Checker node budget")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*bench_cmd) {
      bench.kind = kiwi::bench::parse_workload(workload);
      const auto choice = kiwi::bench::parse_impl(impl);
      std::vector<kiwi::bench::MeasurementResult> results;
      for (std::uint32_t t : threads) {
        bench.threads = t;
        bench.validate();
        results.push_back(kiwi::bench::run_workload(bench, choice));
        const auto& r = results.back();
        for (const auto& [kind, s] : r.kinds) {
          std::cerr << r.workload << ' ' << r.impl << " threads=" << t << ' ' << kind << " mean=" << s.mean
                    << " ops/s stddev=" << s.stddev << '\n';
        }
        if (r.bracket_violations != 0 || r.consistency_errors != 0) {
          std::cerr << "correctness check failed: bracket_violations=" << r.bracket_violations
                    << " consistency_errors=" << r.consistency_errors << '\n';
          return kExitCheckFailed;
        }
      }
      kiwi::bench::emit_results(results, bench_out);
      return kExitOk;
    }
    if (*fuzz_cmd) {
      const auto h = kiwi::lin::record_run(fuzz);
      kiwi::lin::save_history(h, fuzz_out);
      std::cerr << "recorded " << h.records.size() << " operations to " << fuzz_out << '\n';
      if (!fuzz_check) return kExitOk;
      return report(h, kiwi::lin::check_linearizable(h, fuzz_budget));
    }
    const auto h = kiwi::lin::load_history(check_in);
    return report(h, kiwi::lin::check_linearizable(h, check_budget));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
