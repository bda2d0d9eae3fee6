#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "guitraj/backend.hpp"
#include "guitraj/core/types.hpp"

namespace guitraj::meta {

inline constexpr std::uint32_t default_dims = 1u << 18;
inline constexpr double prob_epsilon = 1e-12;

struct labeled_metadata {
    video_metadata meta;
    int label = 0;  // 1 = GUI operation content
    std::optional<std::string> rationale;
    friend bool operator==(const labeled_metadata&, const labeled_metadata&) = default;
};

json to_json(const labeled_metadata& l);
labeled_metadata labeled_metadata_from_json(const json& j);

// Sparse, index-sorted, L2-normalized (or all-zero).
struct feature_vector {
    std::uint32_t dims = default_dims;
    std::vector<std::pair<std::uint32_t, double>> entries;
    friend bool operator==(const feature_vector&, const feature_vector&) = default;
};

// Hashed bag of words. Tokens are lowercased runs of ASCII alphanumerics
// (bytes >= 0x80 count as word characters); each is hashed as "field:token".
feature_vector featurize(const video_metadata& meta, std::uint32_t dims = default_dims);

struct train_config {
    int epochs = 3;
    double learning_rate = 2e-5;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    friend bool operator==(const train_config&, const train_config&) = default;
};

struct linear_classifier {
    std::vector<double> weights;
    double bias = 0;
    train_config training;
    friend bool operator==(const linear_classifier&, const linear_classifier&) = default;
};

double sigmoid(double z) noexcept;
double score(const linear_classifier& model, const feature_vector& x);

// Minority class duplicated cyclically in a seeded order until counts match.
// Throws ONE_CLASS_ONLY / EMPTY_INPUT.
std::vector<labeled_metadata> upsample_balance(const std::vector<labeled_metadata>& data, std::uint64_t seed);

// Mean binary cross-entropy with probabilities clipped to [eps, 1-eps].
double ce_loss(std::span<const double> predictions, std::span<const int> labels);

struct example {
    feature_vector x;
    int label = 0;
};

// Mean CE of sigmoid(w.x + b) and its gradient with respect to (w, b).
double logistic_loss(const linear_classifier& model, std::span<const example> batch);
void logistic_gradient(const linear_classifier& model, std::span<const example> batch, std::vector<double>& grad_w,
                       double& grad_b);

struct epoch_report {
    int epoch = 0;
    double loss = 0;
};

// Seeded mini-batch SGD on the CE objective. Deterministic given the seed.
linear_classifier train_classifier(const std::vector<labeled_metadata>& data, const train_config& config,
                                   std::uint32_t dims = default_dims, std::vector<epoch_report>* history = nullptr);

struct decision {
    double probability = 0;
    bool pass = false;
};

decision classify(const video_metadata& meta, const linear_classifier& model, double threshold = 0.5);

// Weights travel as base64 of little-endian IEEE-754 doubles.
json checkpoint_to_json(const linear_classifier& model);
linear_classifier checkpoint_from_json(const json& j);

// Probability provider: the local classifier or a remote backend.
using decider = std::function<double(const video_metadata&)>;

backend::request build_classify_request(const video_metadata& meta);

// Reads {is_gui_content, confidence}; the probability of GUI content is the
// confidence when positive and its complement otherwise. PARSE_ERROR on
// missing or out-of-range fields.
double parse_classify_response(std::string_view text);

decider remote_decider(backend::client& client);

struct stream_counts {
    std::size_t read = 0;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t malformed = 0;
    friend bool operator==(const stream_counts&, const stream_counts&) = default;
};

struct stream_outputs {
    fs::path passed;     // passing VideoMetadata JSONL
    fs::path decisions;  // {video_id, probability, pass}
    fs::path quarantine; // {line, error, raw}
    fs::path manifest;
};

stream_outputs default_outputs(const fs::path& out_dir);

// Classifies every line of a metadata JSONL file. Malformed or duplicate
// lines are quarantined; classification fans out over `concurrency` workers
// and output keeps input order.
stream_counts filter_stream(const fs::path& input, const decider& decide, double threshold,
                            const stream_outputs& out, std::size_t concurrency = 1);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace guitraj::meta

namespace guitraj::meta {

struct parsed_line {
    std::size_t line_no = 0;  // 1-based
    std::optional<video_metadata> meta;
    std::string error;  // set when meta is empty
    std::string raw;
};

// Skips blank lines; duplicates of an earlier video_id are reported as errors.
std::vector<parsed_line> parse_metadata_lines(const std::vector<std::string>& lines);

}  // namespace guitraj::meta
