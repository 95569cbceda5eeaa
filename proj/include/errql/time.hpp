#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace errql {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Duration = std::chrono::milliseconds;

// Parses an RFC 3339 timestamp ("2020-09-14T18:03:21.250Z" or with a
// "+HH:MM" offset). Fractional seconds beyond milliseconds are truncated.
// Throws ParseError on anything else.
Timestamp parse_rfc3339(const std::string& text);

// Formats as UTC with millisecond precision: "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string format_rfc3339(Timestamp tp);

}  // namespace errql
