#pragma once

#include <cstdint>
#include <string>

#include "guitraj/io.hpp"

namespace guitraj {

struct pipeline_config {
    struct paths_section {
        fs::path work_dir = "work";
        fs::path metadata;          // input JSONL of video metadata
        fs::path frames_dir;        // default <work_dir>/frames
        fs::path fixture_dir;       // mock fixtures and script
        fs::path category_map;      // optional TSV for stats rollups
    } paths;
    struct filter_section {
        std::string mode = "local";  // local | backend
        double threshold = 0.5;
        fs::path training_data;
        fs::path checkpoint;
        int epochs = 3;
        double learning_rate = 2e-5;
        int batch_size = 32;
        std::int64_t feature_dims = 1 << 18;
        bool upsample = true;
    } filter;
    struct score_section {
        double quality_threshold = 4.2;
        double max_duration = 720;
        double clip_seconds = 60;
    } score;
    struct extract_section {
        double window = 240;
        bool strict_parse = false;
    } extract;
    struct ground_section {
        double frame_offset = 0.5;
        std::string extract_command;
        bool synthesize_frames = false;
        std::int64_t frame_width = 1280;
        std::int64_t frame_height = 720;
        std::int64_t audit_samples = 0;
    } ground;
    struct assemble_section {
        bool grounding = true;
        bool action_prediction = true;
        bool trajectory_modeling = true;
        double grounding_bbox_weight = 0.5;
        double action_thought_weight = 0.5;
        double trajectory_thought_weight = 0.5;
        std::int64_t shard_size = 1000;
    } assemble;
    struct backend_section {
        std::string kind = "mock";  // mock | http
        std::string endpoint;
        std::string token_env = "GUITRAJ_API_TOKEN";
        std::int64_t max_attempts = 3;
        double base_backoff = 1.0;
        double rate_limit = 0;
        double connect_timeout = 10;
        double read_timeout = 300;
        bool cache = true;
        fs::path cache_dir;  // default <work_dir>/cache
    } backend;
    struct run_section {
        std::int64_t seed = 0;
        std::int64_t concurrency = 4;
    } run;

    fs::path frames_root() const;
    fs::path cache_root() const;
};

// Parses the key/value document described in the README. Relative paths
// resolve against `base_dir`. Errors are CONFIG_ERROR with the field path.
pipeline_config parse_config(std::string_view text, const fs::path& base_dir = {});
pipeline_config load_config(const fs::path& file);

// Range and cross-field checks; CONFIG_ERROR with the field path.
void validate_config(const pipeline_config& c);

}  // namespace guitraj
