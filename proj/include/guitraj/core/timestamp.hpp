#pragma once

#include <string>
#include <string_view>

namespace guitraj {

// Absolute position in a video. Parsed from "mm:ss", so annotator-produced
// values are whole seconds.
struct timestamp {
    double seconds = 0.0;

    friend bool operator==(const timestamp&, const timestamp&) = default;
    friend auto operator<=>(const timestamp&, const timestamp&) = default;
};

// Accepts ^\d{1,2}:\d{2}$ with the seconds field in 00..59.
// Throws error(MALFORMED_TIMESTAMP).
timestamp parse_timestamp(std::string_view text);

// "mm:ss" with at least two minute digits; fractional seconds are floored.
std::string format_timestamp(double seconds);

}  // namespace guitraj
