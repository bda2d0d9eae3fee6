#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "guitraj/backend.hpp"
#include "guitraj/core/types.hpp"

namespace guitraj::grounder {

inline constexpr double default_offset = 0.5;

// [t - offset, t, t + offset] clamped to [0, duration], duplicates dropped
// with order kept.
std::vector<double> plan_frame_times(double t, double duration, double offset = default_offset);

// "<point>y x</point>" / "<bbox>y1 x1 y2 x2</bbox>" on the 0-1000 grid.
// Errors: TAG_MALFORMED, OUT_OF_RANGE, BBOX_INVERTED.
rel_point parse_point_tag(std::string_view text);
rel_bbox parse_bbox_tag(std::string_view text);

// round(rel * size / 1000) clamped to [0, size - 1].
pixel_point rel_to_pixel(const rel_point& p, int width, int height);
pixel_bbox rel_to_pixel(const rel_bbox& b, int width, int height);

struct prediction {
    rel_point center;
    rel_bbox box;
    friend bool operator==(const prediction&, const prediction&) = default;
};

struct feasible {
    std::map<std::string, prediction> predictions;
};

struct infeasible {
    std::string reason;
};

using grounding_outcome = std::variant<feasible, infeasible>;

// Feasible answers must name exactly `expected_names`. Errors: PARSE_ERROR,
// NAME_MISMATCH, plus the tag errors.
grounding_outcome parse_grounding_response(std::string_view text, const std::vector<std::string>& expected_names);

backend::request build_grounding_request(const user_action& action, const frame_ref& frame,
                                         const std::vector<std::string>& point_names);

// Supplies observation frames; nullopt when a frame cannot be produced.
class frame_source {
public:
    virtual ~frame_source() = default;
    virtual std::optional<frame_ref> frame_at(const std::string& video_id, double time) = 0;
};

struct directory_frames_options {
    // Shell template with {video_id}, {time}, {time_ms}, {output}; run when a
    // frame file is missing.
    std::string extract_command;
    // Write a flat placeholder PNG when the frame is still missing.
    bool synthesize = false;
    int width = 1280;
    int height = 720;
};

// Frames live at <root>/<video_id>/<time_ms>.png; frame_ref::path is
// relative to the root.
class directory_frames final : public frame_source {
public:
    directory_frames(fs::path root, directory_frames_options options);
    std::optional<frame_ref> frame_at(const std::string& video_id, double time) override;
    static fs::path relative_path(const std::string& video_id, double time);

private:
    fs::path root_;
    directory_frames_options options_;
};

struct frame_attempt {
    double time = 0;
    std::string outcome;  // "feasible", "infeasible: ...", "error: ..."
};

struct action_grounding {
    std::optional<grounded_action> grounded;  // empty = discarded
    std::vector<frame_attempt> attempts;
    int backend_calls = 0;
    std::vector<std::string> warnings;
};

// Queries frames in order and keeps the first feasible answer. Malformed
// answers and backend failures count as infeasible for that frame; only
// AUTH_ERROR propagates.
action_grounding ground_action(const user_action& action, platform os, const std::vector<frame_ref>& frames,
                               backend::client& client);

struct action_audit {
    std::size_t index = 0;
    std::string action_type;
    std::string disposition;  // "passthrough" | "grounded" | "discarded"
    int backend_calls = 0;
    std::optional<double> frame_offset;
    std::vector<frame_attempt> attempts;
    std::vector<std::string> warnings;
};

json to_json(const action_audit& a);

struct trajectory_grounding {
    std::optional<grounded_episode> episode;
    std::optional<std::string> rejected;  // EMPTY_TASK, ALL_DISCARDED
    std::vector<action_audit> audit;
};

trajectory_grounding ground_trajectory(const std::string& video_id, const task_annotation& task, double duration,
                                       frame_source& frames, backend::client& client,
                                       double offset = default_offset);

struct audit_pick {
    std::size_t episode = 0;
    std::size_t step = 0;
    std::string param;
};

// Seeded sample of up to n grounded coordinates for manual review.
std::vector<audit_pick> sample_for_audit(const std::vector<grounded_episode>& episodes, std::size_t n,
                                         std::uint64_t seed);

// Draws each pick's box and point on a copy of its frame; files are named
// <video_id>_<task_id>_<step>_<param>.png. Returns the written paths.
std::vector<fs::path> write_audit_overlays(const std::vector<grounded_episode>& episodes,
                                           const std::vector<audit_pick>& picks, const fs::path& frames_root,
                                           const fs::path& out_dir);

}  // namespace guitraj::grounder
