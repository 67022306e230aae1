#pragma once

#include <string>
#include <string_view>

#include "tsync/timebase.hpp"

namespace tsync {

/// Parses "<decimal><unit>" with unit ns, us, ms or s ("100us", "0.5ms",
/// "-2ms") into exact nanoseconds. Bare numbers, unknown units and values
/// that are not a whole number of nanoseconds throw DomainError.
Nanos parse_duration(std::string_view text);

/// Shortest exact spelling in the largest fitting unit ("1s", "500us", "0ns").
std::string format_duration(Nanos value);

}  // namespace tsync
