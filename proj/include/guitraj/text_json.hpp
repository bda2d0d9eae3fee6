#pragma once

#include <optional>
#include <string_view>

#include "guitraj/io.hpp"

namespace guitraj {

struct located_json {
    json value;
    std::size_t begin = 0;  // offset of the opening bracket
    std::size_t end = 0;    // one past the closing bracket
};

// Finds the first complete, parseable JSON value starting with `open`
// ('{' or '[') at or after `from`, skipping prose, code fences and
// bracketed text that is not JSON.
std::optional<located_json> find_json(std::string_view text, char open, std::size_t from = 0);

}  // namespace guitraj
