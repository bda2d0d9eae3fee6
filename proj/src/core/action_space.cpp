#include "guitraj/core/action_space.hpp"

#include <algorithm>
#include <cctype>

#include "guitraj/error.hpp"

namespace guitraj {
namespace {

using pk = param_kind;

param_spec spatial(std::string name) { return {std::move(name), pk::point, true, true, {}}; }
param_spec optional_box(std::string name) { return {std::move(name), pk::bbox, false, false, {}}; }
param_spec req(std::string name, pk kind) { return {std::move(name), kind, true, false, {}}; }
param_spec opt(std::string name, pk kind) { return {std::move(name), kind, false, false, {}}; }
param_spec choice(std::string name, std::vector<std::string> allowed) {
    return {std::move(name), pk::enumeration, true, false, std::move(allowed)};
}

const std::vector<action_spec>& desktop_table() {
    static const std::vector<action_spec> table = {
        {"click", platform_class::desktop, {spatial("point"), optional_box("bbox")}, "Single click at the specified coordinates."},
        {"doubleClick", platform_class::desktop, {spatial("point"), optional_box("bbox")}, "Double click at the specified coordinates."},
        {"tripleClick", platform_class::desktop, {spatial("point"), optional_box("bbox")}, "Triple click at the specified coordinates."},
        {"rightClick", platform_class::desktop, {spatial("point"), optional_box("bbox")}, "Right click at the specified coordinates."},
        {"middleClick", platform_class::desktop, {spatial("point"), optional_box("bbox")}, "Middle click at the specified coordinates."},
        {"press", platform_class::desktop, {req("key_name", pk::text)}, "Press a single key or a sequence of keys."},
        {"write", platform_class::desktop, {req("text", pk::text)}, "Input text into the currently focused element."},
        {"hotkey", platform_class::desktop, {req("keys", pk::key_list)}, "Trigger a system hotkey combination."},
        {"scroll", platform_class::desktop,
         {choice("direction", {"up", "down", "left", "right"}), spatial("point"), req("magnitude_pixels", pk::scalar)},
         "Scroll in a direction at specific coordinates."},
        {"dragTo", platform_class::desktop, {spatial("start_point"), spatial("end_point")}, "Drag from start point to end point."},
        {"moveTo", platform_class::desktop, {spatial("point")}, "Move the cursor to the target position."},
        {"wait", platform_class::desktop, {req("duration", pk::scalar)}, "Pause execution for a given time period (milliseconds)."},
        {"finish", platform_class::desktop, {req("status", pk::text)}, "End the task and return the goal status."},
    };
    return table;
}

const std::vector<action_spec>& mobile_table() {
    static const std::vector<action_spec> table = {
        {"click", platform_class::mobile, {spatial("point"), optional_box("bbox")}, "Tap at the specified coordinates."},
        {"long_press", platform_class::mobile, {spatial("point"), req("duration_ms", pk::scalar), optional_box("bbox")},
         "Press and hold for a specific duration."},
        {"scroll", platform_class::mobile, {choice("direction", {"up", "down", "left", "right"})},
         "Scroll or swipe in the specified direction."},
        {"pinch", platform_class::mobile,
         {spatial("center_point"), choice("direction", {"in", "out"}), req("magnitude_percent", pk::scalar)},
         "Zoom in or out at the specified coordinates."},
        {"input", platform_class::mobile, {req("text", pk::text)}, "Type text into the active input field."},
        {"drag", platform_class::mobile, {spatial("start_point"), spatial("end_point"), opt("duration_ms", pk::scalar)},
         "Perform a drag-and-drop gesture."},
        {"press", platform_class::mobile, {req("key", pk::text)}, "Simulate hardware keys (Home, Back, etc.)."},
        {"open", platform_class::mobile, {req("app", pk::text)}, "Launch a mobile app by its name."},
        {"multi_touch_gesture", platform_class::mobile, {req("pointers", pk::pointer_paths)},
         "Execute complex multi-finger gestures."},
        {"finish", platform_class::mobile, {req("status", pk::text)}, "Terminate task and report status."},
    };
    return table;
}

struct alias {
    platform_class cls;
    std::string_view from;
    std::string_view to;
};

constexpr alias aliases[] = {
    {platform_class::desktop, "input", "write"},
    {platform_class::desktop, "drag", "dragTo"},
    {platform_class::desktop, "hscroll", "scroll"},
    {platform_class::desktop, "finished", "finish"},
    {platform_class::mobile, "longpress", "long_press"},
    {platform_class::mobile, "multi_touch", "multi_touch_gesture"},
    {platform_class::mobile, "finished", "finish"},
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

std::string_view platform_name(platform p) noexcept {
    switch (p) {
        case platform::windows: return "windows";
        case platform::mac: return "mac";
        case platform::linux: return "linux";
        case platform::android: return "android";
        case platform::ios: return "ios";
    }
    return "?";
}

std::optional<platform> parse_platform(std::string_view name) {
    std::string n = lower(name);
    if (n == "macos" || n == "osx") n = "mac";
    for (platform p : {platform::windows, platform::mac, platform::linux, platform::android, platform::ios}) {
        if (n == platform_name(p)) return p;
    }
    return std::nullopt;
}

platform_class class_of(platform p) noexcept {
    return (p == platform::android || p == platform::ios) ? platform_class::mobile : platform_class::desktop;
}

std::string_view class_name(platform_class c) noexcept {
    return c == platform_class::desktop ? "desktop" : "mobile";
}

std::vector<const param_spec*> action_spec::required_params() const {
    std::vector<const param_spec*> out;
    for (const auto& p : params) {
        if (p.required) out.push_back(&p);
    }
    return out;
}

std::vector<std::string> action_spec::spatial_param_names() const {
    std::vector<std::string> out;
    for (const auto& p : params) {
        if (p.spatial) out.push_back(p.name);
    }
    return out;
}

const param_spec* action_spec::find_param(std::string_view name) const {
    for (const auto& p : params) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

std::span<const action_spec> action_table(platform_class cls) {
    return cls == platform_class::desktop ? std::span<const action_spec>(desktop_table())
                                          : std::span<const action_spec>(mobile_table());
}

const action_spec* find_action(platform_class cls, std::string_view action_type) {
    for (const auto& spec : action_table(cls)) {
        if (spec.action_type == action_type) return &spec;
    }
    return nullptr;
}

std::optional<std::string> canonical_action_name(platform_class cls, std::string_view action_type) {
    if (find_action(cls, action_type)) return std::string(action_type);
    for (const auto& a : aliases) {
        if (a.cls == cls && a.from == action_type) return std::string(a.to);
    }
    return std::nullopt;
}

std::vector<std::string> spatial_param_names(platform p, std::string_view action_type) {
    const auto* spec = find_action(class_of(p), action_type);
    if (!spec) {
        throw error(errc::unknown_action,
                    "'" + std::string(action_type) + "' is not a " + std::string(class_name(class_of(p))) + " action");
    }
    return spec->spatial_param_names();
}

std::string describe_action_space(platform_class cls) {
    std::string out;
    for (const auto& spec : action_table(cls)) {
        out += "- " + spec.action_type + "(";
        bool first = true;
        for (const auto& p : spec.params) {
            if (!first) out += ", ";
            first = false;
            out += p.name;
            if (!p.required) out += "?";
        }
        out += "): " + spec.description + "\n";
    }
    out += "Coordinates are [y, x] on a 0-1000 relative grid.";
    return out;
}

}  // namespace guitraj
