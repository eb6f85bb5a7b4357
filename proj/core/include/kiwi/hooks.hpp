#pragma once

#include <functional>
#include <string_view>

#include "kiwi/types.hpp"

namespace kiwi {

/// Points in put's lifecycle where a test hook may run (delay, park, record).
enum class HookPoint {
  kPostAllocate,
  kPostPublish,
  kPreVersionCas,
  kPreListCas,
};

inline constexpr HookPoint kAllHookPoints[] = {
    HookPoint::kPostAllocate,
    HookPoint::kPostPublish,
    HookPoint::kPreVersionCas,
    HookPoint::kPreListCas,
};

constexpr std::string_view to_string(HookPoint p) {
  switch (p) {
    case HookPoint::kPostAllocate: return "post-allocate";
    case HookPoint::kPostPublish: return "post-publish";
    case HookPoint::kPreVersionCas: return "pre-version-cas";
    case HookPoint::kPreListCas: return "pre-list-cas";
  }
  return "?";
}

using HookFn = std::function<void(ThreadSlot, HookPoint)>;

}  // namespace kiwi
