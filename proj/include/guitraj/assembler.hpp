#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "guitraj/core/types.hpp"

namespace guitraj::assembler {

struct export_config {
    bool grounding = true;
    bool action_prediction = true;
    bool trajectory_modeling = true;
    // Probability of picking the second template of each pair: bbox targets
    // for grounding, Thought/Action targets for the other two. 0 pins the
    // first template, 1 the second.
    double grounding_bbox_weight = 0.5;
    double action_thought_weight = 0.5;
    double trajectory_thought_weight = 0.5;
    std::size_t shard_size = 1000;
    std::uint64_t seed = 0;

    // INVALID_ARGUMENT when no task is enabled, a weight leaves [0,1] or shard_size is 0.
    void validate() const;
};

// Action as it appears in targets: {"action": type, ...params}, spatial
// parameters replaced by their relative [y, x] points.
json action_target(const grounded_action& step);

std::vector<training_sample> export_grounding_samples(const std::vector<grounded_episode>& episodes,
                                                      const export_config& config);
std::vector<training_sample> export_action_prediction_samples(const std::vector<grounded_episode>& episodes,
                                                              const export_config& config);
// Complete episodes only.
std::vector<training_sample> export_trajectory_samples(const std::vector<grounded_episode>& episodes,
                                                       const export_config& config);

// Every enabled stream, in the order grounding, action prediction, trajectory.
std::vector<training_sample> export_all(const std::vector<grounded_episode>& episodes, const export_config& config);

// Image parts whose file is missing under `frames_root`.
std::vector<std::string> missing_images(const std::vector<training_sample>& samples, const fs::path& frames_root);

struct shard_info {
    std::string file;
    std::size_t samples = 0;
    std::size_t bytes = 0;
    std::string checksum;  // FNV-1a 64, hex
    friend bool operator==(const shard_info&, const shard_info&) = default;
};

struct shard_manifest {
    std::size_t shard_size = 0;
    std::uint64_t seed = 0;
    std::map<std::string, std::size_t> counts;  // by task kind, all kinds present
    std::size_t total = 0;
    std::vector<shard_info> shards;
    friend bool operator==(const shard_manifest&, const shard_manifest&) = default;
};

json to_json(const shard_manifest& m);
shard_manifest shard_manifest_from_json(const json& j);

// Shuffles under the seed, writes shard-00000.jsonl... of at most shard_size
// lines each, then manifest.json. Stale shard files from earlier runs are removed.
shard_manifest write_shards(std::vector<training_sample> samples, std::size_t shard_size, const fs::path& out_dir,
                            std::uint64_t seed);

}  // namespace guitraj::assembler
