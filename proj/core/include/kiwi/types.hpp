#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace kiwi {

using Key = std::int64_t;
using Value = std::int64_t;

/// A stored value, or std::nullopt for a tombstone (the key is absent).
using MaybeValue = std::optional<Value>;

inline constexpr MaybeValue kTombstone = std::nullopt;

inline constexpr Key kMinKey = std::numeric_limits<Key>::min();
inline constexpr Key kMaxKey = std::numeric_limits<Key>::max();

/// Stable per-thread identity used to index PPA/PSA cells and counter shards.
class ThreadSlot {
 public:
  constexpr ThreadSlot() = default;
  constexpr explicit ThreadSlot(std::uint32_t id) : id_(id) {}

  constexpr std::uint32_t id() const { return id_; }
  constexpr bool operator==(const ThreadSlot&) const = default;

 private:
  std::uint32_t id_ = 0;
};

class RegistrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Encoding of an order entry's version word.
///
///   0          NONE (not yet versioned, invisible)
///   INT64_MIN  FROZEN (claimed by a rebalance before receiving a version)
///   -v         Pending(v): versioned and visible, maybe not yet in the list
///   +v         Committed(v): linked into the chunk list
namespace version_word {

inline constexpr std::int64_t kNone = 0;
inline constexpr std::int64_t kFrozen = std::numeric_limits<std::int64_t>::min();

constexpr bool is_none(std::int64_t w) { return w == kNone; }
constexpr bool is_frozen(std::int64_t w) { return w == kFrozen; }
constexpr bool is_pending(std::int64_t w) { return w < 0 && w != kFrozen; }
constexpr bool is_committed(std::int64_t w) { return w > 0; }
constexpr bool has_version(std::int64_t w) { return is_pending(w) || is_committed(w); }

constexpr std::int64_t pending(std::int64_t v) { return -v; }
constexpr std::int64_t committed(std::int64_t v) { return v; }

/// Version number of a Pending or Committed word.
constexpr std::int64_t number(std::int64_t w) { return w < 0 ? -w : w; }

}  // namespace version_word

/// dataIndex encoding: a non-negative value indexes the data array; a negative
/// value -(slot + 1) marks a tombstone allocated at `slot`.
namespace data_index {

constexpr bool is_tombstone(std::int64_t d) { return d < 0; }
constexpr std::int64_t tombstone_for(std::int64_t slot) { return -(slot + 1); }

/// Allocation slot a dataIndex was written from. Newer writes have larger
/// slots, so this is the value "newest" comparisons and the overwrite rule use.
constexpr std::int64_t slot_of(std::int64_t d) { return d < 0 ? -(d + 1) : d; }

}  // namespace data_index

}  // namespace kiwi
