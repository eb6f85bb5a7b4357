#pragma once

#include <map>

#include "kiwi/lin/history.hpp"

namespace kiwi::lin {

/// Sequential reference semantics: a plain ordered map.
using MapModel = std::map<Key, Value>;

/// Applies `op` to `state`. Returns false, leaving `state` untouched, when the
/// recorded result disagrees with what the model would have produced.
bool oracle_apply(MapModel& state, const Operation& op);

/// Runs an operation against the model and fills in its result fields.
void oracle_execute(MapModel& state, Operation& op);

}  // namespace kiwi::lin
