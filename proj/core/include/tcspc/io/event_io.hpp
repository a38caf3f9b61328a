#pragma once

#include <span>
#include <string>
#include <vector>

#include "tcspc/sim/config.hpp"

namespace tcspc {

// CSV stream of detected events, one "cycle,pulse,raw_time_ps,kind" row per
// event. include_kind = false suppresses the truth-tag column, emulating
// blinded data; such files read back with every kind set to decay.
void write_events(const std::string& path, std::span<const EventRecord> events,
                  bool include_kind = true);
std::vector<EventRecord> read_events(const std::string& path);

}  // namespace tcspc
