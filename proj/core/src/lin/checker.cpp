#include "kiwi/lin/checker.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "kiwi/lin/oracle.hpp"

namespace kiwi::lin {

namespace {

class Search {
 public:
  Search(const History& h, std::uint64_t budget) : h_(h), budget_(budget) {
    by_invoke_.resize(h.records.size());
    std::iota(by_invoke_.begin(), by_invoke_.end(), std::size_t{0});
    // Ties broken by content-free fields only, so file order cannot matter
    // beyond exact duplicates.
    std::sort(by_invoke_.begin(), by_invoke_.end(), [&](std::size_t a, std::size_t b) {
      const OpRecord& x = h.records[a];
      const OpRecord& y = h.records[b];
      if (x.invoke_ts != y.invoke_ts) return x.invoke_ts < y.invoke_ts;
      if (x.response_ts != y.response_ts) return x.response_ts < y.response_ts;
      return x.thread < y.thread;
    });
    done_.assign((h.records.size() + 63) / 64, 0);
  }

  CheckResult run() {
    CheckResult r;
    MapModel model;
    bool ok = false;
    try {
      ok = dfs(model);
    } catch (const BudgetHit&) {
      r.verdict = Verdict::kExhausted;
      r.nodes = budget_;
      return r;
    }
    r.nodes = nodes_;
    if (ok) {
      r.verdict = Verdict::kLinearizable;
      r.order = path_;
    } else {
      r.verdict = Verdict::kNotLinearizable;
      r.order = best_;
      r.stuck = best_stuck_;
    }
    return r;
  }

 private:
  struct BudgetHit {};

  bool is_done(std::size_t i) const { return (done_[i / 64] >> (i % 64)) & 1U; }
  void flip(std::size_t i) { done_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  std::string memo_key(const MapModel& model) const {
    std::string k(reinterpret_cast<const char*>(done_.data()), done_.size() * sizeof(std::uint64_t));
    for (const auto& [key, v] : model) {
      k.append(reinterpret_cast<const char*>(&key), sizeof key);
      k.append(reinterpret_cast<const char*>(&v), sizeof v);
    }
    return k;
  }

  bool dfs(MapModel& model) {
    if (++nodes_ > budget_) throw BudgetHit{};
    if (path_.size() == h_.records.size()) return true;

    std::int64_t min_response = INT64_MAX;
    for (std::size_t i : by_invoke_) {
      if (!is_done(i)) min_response = std::min(min_response, h_.records[i].response_ts);
    }

    std::vector<std::size_t> candidates;
    for (std::size_t i : by_invoke_) {
      if (is_done(i)) continue;
      if (h_.records[i].invoke_ts >= min_response) break;
      candidates.push_back(i);
    }

    std::string key = memo_key(model);
    if (failed_.contains(key)) return false;

    for (std::size_t i : candidates) {
      MapModel next = model;
      if (!oracle_apply(next, h_.records[i].op)) continue;
      flip(i);
      path_.push_back(i);
      if (dfs(next)) return true;
      path_.pop_back();
      flip(i);
    }

    if (path_.size() > best_.size() || (best_.empty() && best_stuck_.empty())) {
      best_ = path_;
      best_stuck_ = candidates;
    }
    failed_.insert(std::move(key));
    return false;
  }

  const History& h_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::vector<std::size_t> by_invoke_;
  std::vector<std::uint64_t> done_;
  std::vector<std::size_t> path_;
  std::vector<std::size_t> best_;
  std::vector<std::size_t> best_stuck_;
  std::unordered_set<std::string> failed_;
};

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kLinearizable: return "Linearizable";
    case Verdict::kNotLinearizable: return "NotLinearizable";
    case Verdict::kExhausted: return "Exhausted";
  }
  return "?";
}

std::string CheckResult::explain(const History& h) const {
  std::ostringstream os;
  os << to_string(verdict) << " after " << nodes << " nodes";
  if (verdict != Verdict::kNotLinearizable) return os.str();
  os << "\nlongest linearizable prefix (" << order.size() << " of " << h.records.size() << " ops):";
  for (std::size_t i : order) os << "\n  " << describe(h.records[i]);
  os << "\nno minimal operation can follow it:";
  for (std::size_t i : stuck) os << "\n  " << describe(h.records[i]);
  return os.str();
}

CheckResult check_linearizable(const History& h, std::uint64_t node_budget) {
  validate(h);
  return Search(h, node_budget).run();
}

}  // namespace kiwi::lin
