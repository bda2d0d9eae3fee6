#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "guitraj/core/params.hpp"

namespace guitraj {

enum class platform { windows, mac, linux, android, ios };
enum class platform_class { desktop, mobile };

std::string_view platform_name(platform p) noexcept;
// Case-insensitive; "macos" and "osx" also name mac.
std::optional<platform> parse_platform(std::string_view name);
platform_class class_of(platform p) noexcept;
std::string_view class_name(platform_class c) noexcept;

struct param_spec {
    std::string name;
    param_kind kind;
    bool required = true;
    // Needs resolution against a high-resolution frame.
    bool spatial = false;
    std::vector<std::string> allowed;  // enumeration kind only
};

struct action_spec {
    std::string action_type;
    platform_class cls;
    std::vector<param_spec> params;
    std::string description;

    std::vector<const param_spec*> required_params() const;
    std::vector<std::string> spatial_param_names() const;
    const param_spec* find_param(std::string_view name) const;
};

std::span<const action_spec> action_table(platform_class cls);

const action_spec* find_action(platform_class cls, std::string_view action_type);

// Maps accepted spellings (e.g. "finished", "dragTo"/"drag", "hscroll") onto
// the canonical table name; nullopt if unknown for the class.
std::optional<std::string> canonical_action_name(platform_class cls, std::string_view action_type);

// Throws error(UNKNOWN_ACTION) when the type is not in the class's table.
std::vector<std::string> spatial_param_names(platform p, std::string_view action_type);

// Human-readable action space listing for prompts.
std::string describe_action_space(platform_class cls);

}  // namespace guitraj
