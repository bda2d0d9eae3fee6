#pragma once

#include <optional>
#include <span>
#include <string>

#include "guitraj/backend.hpp"
#include "guitraj/core/types.hpp"

namespace guitraj::scorer {

inline constexpr double default_gate = 4.2;
inline constexpr double default_max_duration = 720.0;
inline constexpr double clip_seconds = 60.0;

struct clip_range {
    double start = 0;
    double end = 0;
    friend bool operator==(const clip_range&, const clip_range&) = default;
};

// First minute, or the whole video when shorter. Throws NONPOSITIVE_DURATION.
clip_range select_scoring_clip(double duration, double max_clip = clip_seconds);

// Strict: duration < max.
bool duration_gate(const video_metadata& meta, double max = default_max_duration);

// Inclusive: every dimension >= threshold.
bool passes_quality_gate(const quality_score& score, double threshold = default_gate);

// (1/N) * sum_i sum_j (gold_ij - pred_ij)^2 -- summed, not averaged, over dims.
double mse_loss(std::span<const quality_score> pred, std::span<const quality_score> gold);

struct scored_video {
    quality_score score;
    std::string topic_reasoning;
    std::string clarity_reasoning;
    std::string recording_reasoning;
    std::string summary;
};

// Parses the scorer's JSON response. Scores must be numeric and within
// [1,5]; otherwise PARSE_ERROR.
scored_video parse_score_response(std::string_view text);

backend::request build_score_request(const video_metadata& meta, const clip_range& clip);

scored_video score_video(const video_metadata& meta, const clip_range& clip, backend::client& client);

struct scoring_decision {
    std::string video_id;
    std::optional<quality_score> score;  // empty when gated out before scoring
    std::optional<std::string> gated_by; // "duration" or an error code
    bool passed = false;
    std::string reasoning;
};

json to_json(const scoring_decision& d);

}  // namespace guitraj::scorer
