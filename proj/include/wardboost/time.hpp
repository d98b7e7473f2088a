#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace wardboost {

// Timestamps are UTC seconds since the Unix epoch.
using Timestamp = std::int64_t;

inline constexpr std::int64_t kSecondsPerHour = 3600;

// Converts a duration in hours to whole seconds (rounded to nearest).
Timestamp hours_to_seconds(double hours);

// Parses "YYYY-MM-DDTHH:MM:SS" followed by an optional fractional part
// (truncated) and either "Z" or a "+HH:MM"/"-HH:MM" offset.
// Throws std::invalid_argument on malformed input.
Timestamp parse_iso8601_utc(std::string_view text);

// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601_utc(Timestamp t);

}  // namespace wardboost
