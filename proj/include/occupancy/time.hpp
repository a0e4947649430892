#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace occupancy {

using Timestamp = std::chrono::sys_seconds;
using Minutes = std::chrono::minutes;

inline constexpr std::chrono::seconds kSamplePeriod{60};

// Parses `YYYY-MM-DDTHH:MM[:SS](Z|±HH:MM)`. A missing zone designator is read as UTC.
// Throws InvalidArgument on malformed input.
Timestamp parse_timestamp(std::string_view text);

// Always emits UTC with a trailing `Z`, e.g. `2013-04-03T08:00:00Z`.
std::string format_timestamp(Timestamp t);

// Parses `±HH:MM` (or `Z`) into a signed minute offset from UTC.
Minutes parse_utc_offset(std::string_view text);

// Local civil-time helpers for a fixed UTC offset.
struct LocalTime {
    int minute_of_day;  // 0..1439
    unsigned weekday;   // 0 = Sunday .. 6 = Saturday
};

LocalTime to_local(Timestamp t, Minutes utc_offset);

// Start of the local calendar day containing t, expressed as a UTC instant.
Timestamp local_midnight(Timestamp t, Minutes utc_offset);

}  // namespace occupancy
