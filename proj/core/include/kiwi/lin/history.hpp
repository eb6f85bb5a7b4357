#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "kiwi/kiwi_map.hpp"
#include "kiwi/types.hpp"

namespace kiwi::lin {

struct PutOp {
  Key key = 0;
  MaybeValue value;
  bool operator==(const PutOp&) const = default;
};

struct GetOp {
  Key key = 0;
  MaybeValue result;
  bool operator==(const GetOp&) const = default;
};

struct ScanOp {
  Key lo = 0;
  Key hi = 0;
  ScanResult result;
  bool operator==(const ScanOp&) const = default;
};

/// A size() call that returned Known(result).
struct SizeOp {
  std::int64_t result = 0;
  bool operator==(const SizeOp&) const = default;
};

/// An isEmpty() call that returned a definite answer.
struct IsEmptyOp {
  bool result = false;
  bool operator==(const IsEmptyOp&) const = default;
};

using Operation = std::variant<PutOp, GetOp, ScanOp, SizeOp, IsEmptyOp>;

std::string_view kind_name(const Operation& op);

struct OpRecord {
  std::uint32_t thread = 0;
  Operation op;
  std::int64_t invoke_ts = 0;
  std::int64_t response_ts = 0;
  bool operator==(const OpRecord&) const = default;
};

struct HistoryMeta {
  std::uint64_t seed = 0;
  std::uint32_t threads = 0;
  std::string op_mix;
  std::string delay_profile;
  bool operator==(const HistoryMeta&) const = default;
};

struct History {
  HistoryMeta meta;
  std::vector<OpRecord> records;
  bool operator==(const History&) const = default;
};

class HistoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws HistoryError unless every record has invoke < response and each
/// thread's records are non-overlapping.
void validate(const History& h);

/// Pretty one-liner, e.g. "t1 put(3, 7) [10, 42]".
std::string describe(const OpRecord& r);

/// JSON-lines: one metadata object, then one object per record with fields
/// thread, kind, args, result, invokeTs, responseTs.
void save_history(const History& h, const std::filesystem::path& path);
History load_history(const std::filesystem::path& path);

std::string to_jsonl(const History& h);
/// Parse errors name the offending 1-based line.
History from_jsonl(const std::string& text);

}  // namespace kiwi::lin
