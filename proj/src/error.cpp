#include "guitraj/error.hpp"

namespace guitraj {

std::string_view code_name(errc code) noexcept {
    switch (code) {
        case errc::malformed_timestamp: return "MALFORMED_TIMESTAMP";
        case errc::unknown_action: return "UNKNOWN_ACTION";
        case errc::length_mismatch: return "LENGTH_MISMATCH";
        case errc::empty_input: return "EMPTY_INPUT";
        case errc::one_class_only: return "ONE_CLASS_ONLY";
        case errc::nonpositive_duration: return "NONPOSITIVE_DURATION";
        case errc::parse_error: return "PARSE_ERROR";
        case errc::backend_error: return "BACKEND_ERROR";
        case errc::backend_exhausted: return "BACKEND_EXHAUSTED";
        case errc::auth_error: return "AUTH_ERROR";
        case errc::missing_shot_section: return "MISSING_SHOT_SECTION";
        case errc::missing_json: return "MISSING_JSON";
        case errc::json_schema_error: return "JSON_SCHEMA_ERROR";
        case errc::timestamp_error: return "TIMESTAMP_ERROR";
        case errc::task_id_conflict: return "TASK_ID_CONFLICT";
        case errc::timestamp_regression: return "TIMESTAMP_REGRESSION";
        case errc::history_for_first_segment: return "HISTORY_FOR_FIRST_SEGMENT";
        case errc::tag_malformed: return "TAG_MALFORMED";
        case errc::out_of_range: return "OUT_OF_RANGE";
        case errc::bbox_inverted: return "BBOX_INVERTED";
        case errc::name_mismatch: return "NAME_MISMATCH";
        case errc::missing_upstream: return "MISSING_UPSTREAM";
        case errc::config_error: return "CONFIG_ERROR";
        case errc::io_error: return "IO_ERROR";
        case errc::invalid_argument: return "INVALID_ARGUMENT";
    }
    return "UNKNOWN";
}

}  // namespace guitraj
