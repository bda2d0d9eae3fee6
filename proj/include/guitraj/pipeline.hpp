#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "guitraj/backend.hpp"
#include "guitraj/config.hpp"

namespace guitraj::pipeline {

enum class stage_id { filter_meta, score, extract, ground, assemble, stats };

inline constexpr stage_id all_stages[] = {stage_id::filter_meta, stage_id::score,    stage_id::extract,
                                          stage_id::ground,      stage_id::assemble, stage_id::stats};

std::string_view stage_name(stage_id s) noexcept;
std::optional<stage_id> parse_stage_name(std::string_view name);

struct run_options {
    bool resume = false;
    // Stop each stage after this many items, leaving it partial.
    std::optional<std::size_t> stop_after;
    // Replaces the configured backend (still wrapped by the cache).
    std::shared_ptr<backend::backend> backend;
    std::shared_ptr<backend::clock> clock;
};

struct stage_result {
    stage_id stage = stage_id::filter_meta;
    bool complete = false;
    bool interrupted = false;
    std::size_t items = 0;
    std::size_t processed = 0;  // this invocation
    std::size_t skipped = 0;    // already complete on resume
    std::size_t failed = 0;
    std::vector<std::string> errors;
    json counts = json::object();

    bool ok() const { return complete && failed == 0; }
};

json to_json(const stage_result& r);

class runner {
public:
    explicit runner(pipeline_config config, run_options options = {});
    ~runner();

    // MISSING_UPSTREAM when the previous stage has no complete manifest.
    stage_result run_stage(stage_id s);
    // Runs every stage in order and stops after the first one that is not ok.
    std::vector<stage_result> run_all();

    fs::path stage_dir(stage_id s) const;
    const pipeline_config& config() const noexcept { return config_; }

private:
    struct impl;
    pipeline_config config_;
    run_options options_;
    std::unique_ptr<impl> impl_;
};

// Process exit status for an error escaping a stage.
int exit_code_for(const error& e) noexcept;

}  // namespace guitraj::pipeline
