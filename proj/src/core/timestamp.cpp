#include "guitraj/core/timestamp.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "guitraj/error.hpp"

namespace guitraj {

timestamp parse_timestamp(std::string_view text) {
    auto fail = [&] {
        return error(errc::malformed_timestamp, "expected mm:ss, got '" + std::string(text) + "'");
    };
    const auto colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon > 2 || text.size() != colon + 3) throw fail();
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i != colon && !std::isdigit(static_cast<unsigned char>(text[i]))) throw fail();
    }
    int minutes = 0;
    for (std::size_t i = 0; i < colon; ++i) minutes = minutes * 10 + (text[i] - '0');
    const int secs = (text[colon + 1] - '0') * 10 + (text[colon + 2] - '0');
    if (secs > 59) throw fail();
    return timestamp{60.0 * minutes + secs};
}

std::string format_timestamp(double seconds) {
    if (!(seconds >= 0.0)) throw error(errc::invalid_argument, "negative timestamp");
    const auto whole = static_cast<long long>(std::floor(seconds));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld", whole / 60, whole % 60);
    return buf;
}

}  // namespace guitraj
