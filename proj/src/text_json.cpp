#include "guitraj/text_json.hpp"

namespace guitraj {
namespace {

// Offset one past the bracket matching text[start], honoring JSON strings.
std::optional<std::size_t> matching_close(std::string_view text, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '[' || c == '{') {
            ++depth;
        } else if (c == ']' || c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<located_json> find_json(std::string_view text, char open, std::size_t from) {
    for (std::size_t pos = text.find(open, from); pos != std::string_view::npos; pos = text.find(open, pos + 1)) {
        auto close = matching_close(text, pos);
        if (!close) continue;
        auto value = json::parse(text.substr(pos, *close - pos), nullptr, false);
        if (!value.is_discarded()) return located_json{std::move(value), pos, *close};
    }
    return std::nullopt;
}

}  // namespace guitraj
