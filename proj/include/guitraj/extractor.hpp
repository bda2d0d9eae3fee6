#pragma once

#include <string>
#include <vector>

#include "guitraj/backend.hpp"
#include "guitraj/core/types.hpp"

namespace guitraj::extractor {

inline constexpr double default_window = 240.0;

// ceil(duration / window) consecutive segments tiling [0, duration].
// Throws NONPOSITIVE_DURATION.
std::vector<segment> segment_video(const std::string& video_id, double duration, double window = default_window);

struct shot {
    timestamp start;
    timestamp end;
    friend bool operator==(const shot&, const shot&) = default;
};

using shot_list = std::vector<shot>;

struct extraction_context {
    std::string video_id;
    std::vector<task_annotation> prior_tasks;  // sorted by task_id
    segment seg;
};

// Segment 1 gets the base annotation template; later segments get the
// continuation template with the history and the segment bounds filled in.
// Throws HISTORY_FOR_FIRST_SEGMENT.
backend::request build_extraction_request(const extraction_context& ctx);

// Canonical JSON array of tasks as placed in the history slot.
std::string serialize_history(const std::vector<task_annotation>& tasks);

struct annotation_response {
    shot_list shots;
    std::vector<task_annotation> tasks;
    // Per task: fields outside the schema, keyed by their path.
    std::vector<json> unknown_fields;
};

struct parse_options {
    // Strict: nothing but whitespace may surround the JSON list.
    bool strict = false;
};

// Errors: MISSING_SHOT_SECTION, MISSING_JSON, JSON_SCHEMA_ERROR (with path),
// TIMESTAMP_ERROR (names the task id and action index).
annotation_response parse_annotation_response(std::string_view text, parse_options options = {});

// Inverse of parse_annotation_response for canonical data: a "Shot Splitting"
// list followed by a fenced JSON list of tasks.
std::string render_annotation_response(const shot_list& shots, const std::vector<task_annotation>& tasks);

// Joins a new segment's tasks onto the accumulated ones. An incomplete last
// prior task is continued by a new task carrying its id; other new tasks
// must take the next free ids. Errors: TASK_ID_CONFLICT, TIMESTAMP_REGRESSION.
std::vector<task_annotation> merge_segments(const std::vector<task_annotation>& prior,
                                            const std::vector<task_annotation>& fresh);

struct task_report {
    int task_id = 0;
    bool complete = false;
    std::vector<violation> violations;  // `param` holds the action index when relevant
    std::vector<violation> warnings;
    bool retained() const { return violations.empty(); }
};

json to_json(const task_report& r);

std::vector<task_report> validate_trajectory(const std::vector<task_annotation>& tasks, double video_duration);

// Case-insensitive match against common browser names.
bool is_browser(std::string_view software);

}  // namespace guitraj::extractor
