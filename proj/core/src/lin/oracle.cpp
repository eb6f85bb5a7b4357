#include "kiwi/lin/oracle.hpp"

namespace kiwi::lin {

namespace {

MaybeValue lookup(const MapModel& m, Key k) {
  auto it = m.find(k);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

ScanResult range(const MapModel& m, Key lo, Key hi) {
  ScanResult out;
  if (lo > hi) return out;
  for (auto it = m.lower_bound(lo); it != m.end() && it->first <= hi; ++it) out.emplace_back(*it);
  return out;
}

void apply_put(MapModel& m, const PutOp& p) {
  if (p.value) {
    m[p.key] = *p.value;
  } else {
    m.erase(p.key);
  }
}

}  // namespace

bool oracle_apply(MapModel& state, const Operation& op) {
  if (const auto* p = std::get_if<PutOp>(&op)) {
    apply_put(state, *p);
    return true;
  }
  if (const auto* g = std::get_if<GetOp>(&op)) return lookup(state, g->key) == g->result;
  if (const auto* s = std::get_if<ScanOp>(&op)) return range(state, s->lo, s->hi) == s->result;
  if (const auto* z = std::get_if<SizeOp>(&op)) return static_cast<std::int64_t>(state.size()) == z->result;
  return state.empty() == std::get<IsEmptyOp>(op).result;
}

void oracle_execute(MapModel& state, Operation& op) {
  if (auto* p = std::get_if<PutOp>(&op)) {
    apply_put(state, *p);
  } else if (auto* g = std::get_if<GetOp>(&op)) {
    g->result = lookup(state, g->key);
  } else if (auto* s = std::get_if<ScanOp>(&op)) {
    s->result = range(state, s->lo, s->hi);
  } else if (auto* z = std::get_if<SizeOp>(&op)) {
    z->result = static_cast<std::int64_t>(state.size());
  } else {
    std::get<IsEmptyOp>(op).result = state.empty();
  }
}

}  // namespace kiwi::lin
