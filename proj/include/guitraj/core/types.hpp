#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "guitraj/core/action_space.hpp"
#include "guitraj/core/params.hpp"
#include "guitraj/core/timestamp.hpp"
#include "guitraj/io.hpp"

namespace guitraj {

using seconds_t = double;

struct video_metadata {
    std::string video_id;
    std::string title;
    std::string description;
    std::vector<std::string> keywords;
    std::string channel;
    std::string category;
    std::optional<std::string> subtitles;
    seconds_t duration = 0;

    friend bool operator==(const video_metadata&, const video_metadata&) = default;
};

struct quality_score {
    double topic_relevance = 1;
    double instruction_clarity = 1;
    double recording_quality = 1;

    double min_dimension() const;
    friend bool operator==(const quality_score&, const quality_score&) = default;
};

struct segment {
    std::string video_id;
    int index = 1;  // 1-based
    seconds_t start = 0;
    seconds_t end = 0;

    friend bool operator==(const segment&, const segment&) = default;
};

struct user_action {
    timestamp at;
    std::string action_type;
    std::string grounding_instruction;
    std::string action_reason;
    param_map action_parameters;
    std::string core_change_reason;
    std::string core_change;

    friend bool operator==(const user_action&, const user_action&) = default;
};

struct task_annotation {
    int task_id = 0;
    std::string instruction;
    std::string dense_caption;
    std::string plan;
    platform os = platform::windows;
    std::string software;
    std::optional<std::string> website;
    std::vector<user_action> user_actions;
    bool complete = false;

    // Recomputes `complete` from the action list.
    void refresh_complete();
    friend bool operator==(const task_annotation&, const task_annotation&) = default;
};

struct rel_point {
    int y = 0;
    int x = 0;
    friend bool operator==(const rel_point&, const rel_point&) = default;
};

struct rel_bbox {
    int y1 = 0, x1 = 0, y2 = 0, x2 = 0;
    friend bool operator==(const rel_bbox&, const rel_bbox&) = default;
};

struct pixel_point {
    int x = 0;
    int y = 0;
    friend bool operator==(const pixel_point&, const pixel_point&) = default;
};

struct pixel_bbox {
    int x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    friend bool operator==(const pixel_bbox&, const pixel_bbox&) = default;
};

struct frame_ref {
    std::string video_id;
    seconds_t time = 0;
    std::string path;
    int width = 0;
    int height = 0;
    friend bool operator==(const frame_ref&, const frame_ref&) = default;
};

struct resolved_param {
    rel_point rel;
    std::optional<rel_bbox> rel_box;
    pixel_point pixel;
    std::optional<pixel_bbox> pixel_box;
    friend bool operator==(const resolved_param&, const resolved_param&) = default;
};

struct grounded_action {
    user_action base;
    std::map<std::string, resolved_param> resolved;
    double source_frame_offset = 0;
    frame_ref frame;  // o_t
    friend bool operator==(const grounded_action&, const grounded_action&) = default;
};

struct grounded_episode {
    std::string video_id;
    int task_id = 0;
    std::string instruction;
    std::string dense_caption;
    std::string plan;
    platform os = platform::windows;
    std::string software;
    std::optional<std::string> website;
    bool complete = false;
    std::vector<grounded_action> steps;

    std::size_t length() const { return steps.size(); }
    friend bool operator==(const grounded_episode&, const grounded_episode&) = default;
};

enum class task_kind { grounding, action_prediction, trajectory_modeling };
std::string_view task_kind_name(task_kind k) noexcept;
std::optional<task_kind> parse_task_kind(std::string_view name);

struct message_part {
    enum class type { text, image } kind = type::text;
    std::string content;  // text, or image path
    bool loss_masked = true;
    friend bool operator==(const message_part&, const message_part&) = default;
};

struct message {
    std::string role;  // "system" | "user" | "assistant"
    std::vector<message_part> parts;
    friend bool operator==(const message&, const message&) = default;
};

struct training_sample {
    task_kind kind = task_kind::grounding;
    std::vector<message> messages;
    json meta = json::object();
    friend bool operator==(const training_sample&, const training_sample&) = default;
};

// Canonical JSON encodings. Decoders throw error(JSON_SCHEMA_ERROR) with a path.
json to_json(const video_metadata& v);
video_metadata video_metadata_from_json(const json& j);
json to_json(const quality_score& q);
quality_score quality_score_from_json(const json& j);
json to_json(const segment& s);
segment segment_from_json(const json& j);
json to_json(const user_action& a);
// With a platform class, parameters are decoded against the action schema;
// without one, by shape.
user_action user_action_from_json(const json& j, std::optional<platform_class> cls = std::nullopt,
                                  const std::string& path = "");
json to_json(const task_annotation& t);
task_annotation task_annotation_from_json(const json& j, const std::string& path = "");
json to_json(const frame_ref& f);
frame_ref frame_ref_from_json(const json& j);
json to_json(const grounded_action& g);
grounded_action grounded_action_from_json(const json& j, platform_class cls);
json to_json(const grounded_episode& e);
grounded_episode grounded_episode_from_json(const json& j);
json to_json(const training_sample& s);
training_sample training_sample_from_json(const json& j);

// --- validation ---

struct violation {
    std::string code;  // e.g. "UNKNOWN_ACTION", "MISSING_PARAM"
    std::string param;
    std::string detail;
    friend bool operator==(const violation&, const violation&) = default;
};

struct validation_report {
    std::vector<violation> violations;
    bool ok() const { return violations.empty(); }
    friend bool operator==(const validation_report&, const validation_report&) = default;
};

// Pure: legality of the action type for the platform and presence/kind of
// every required non-spatial parameter.
validation_report validate_action(platform p, const user_action& action);

}  // namespace guitraj
