#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kiwi/lin/history.hpp"

namespace kiwi::lin {

enum class Verdict { kLinearizable, kNotLinearizable, kExhausted };

std::string_view to_string(Verdict v);

struct CheckResult {
  Verdict verdict = Verdict::kExhausted;
  /// kLinearizable: a full linearization order (indices into h.records).
  /// kNotLinearizable: the longest prefix the search could linearize.
  std::vector<std::size_t> order;
  /// kNotLinearizable: the minimal operations none of which extend `order`.
  std::vector<std::size_t> stuck;
  std::uint64_t nodes = 0;

  /// Human-readable witness.
  std::string explain(const History& h) const;
};

inline constexpr std::uint64_t kDefaultNodeBudget = 5'000'000;

/// Wing&Gong search, simplified as by Lowe: repeatedly linearize a minimal
/// operation (invoked before every remaining operation's response), checking
/// its result against the sequential map model, and backtrack on mismatch.
/// Candidates are tried in invocation order; failed (done-set, model) states
/// are memoized. Each visited search node costs one unit of `node_budget`.
///
/// Throws HistoryError if `h` is malformed.
CheckResult check_linearizable(const History& h, std::uint64_t node_budget = kDefaultNodeBudget);

}  // namespace kiwi::lin
