#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace guitraj {

// Machine-readable failure codes shared by every stage.
enum class errc {
    malformed_timestamp,
    unknown_action,
    length_mismatch,
    empty_input,
    one_class_only,
    nonpositive_duration,
    parse_error,
    backend_error,
    backend_exhausted,
    auth_error,
    missing_shot_section,
    missing_json,
    json_schema_error,
    timestamp_error,
    task_id_conflict,
    timestamp_regression,
    history_for_first_segment,
    tag_malformed,
    out_of_range,
    bbox_inverted,
    name_mismatch,
    missing_upstream,
    config_error,
    io_error,
    invalid_argument,
};

std::string_view code_name(errc code) noexcept;

class error : public std::runtime_error {
public:
    error(errc code, const std::string& message, std::string path = {})
        : std::runtime_error(std::string(code_name(code)) + ": " + message),
          code_(code),
          path_(std::move(path)) {}

    errc code() const noexcept { return code_; }

    // JSON-pointer-like location for schema errors, config field for config errors.
    const std::string& path() const noexcept { return path_; }

private:
    errc code_;
    std::string path_;
};

}  // namespace guitraj
