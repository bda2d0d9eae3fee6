#include "guitraj/video_scorer.hpp"

#include <algorithm>

#include "guitraj/error.hpp"
#include "guitraj/prompts.hpp"
#include "guitraj/text_json.hpp"

namespace guitraj::scorer {

clip_range select_scoring_clip(double duration, double max_clip) {
    if (!(duration > 0)) throw error(errc::nonpositive_duration, "duration must be positive");
    return {0.0, std::min(max_clip, duration)};
}

bool duration_gate(const video_metadata& meta, double max) { return meta.duration < max; }

bool passes_quality_gate(const quality_score& score, double threshold) { return score.min_dimension() >= threshold; }

double mse_loss(std::span<const quality_score> pred, std::span<const quality_score> gold) {
    if (pred.size() != gold.size()) throw error(errc::length_mismatch, "pred and gold differ in length");
    if (pred.empty()) throw error(errc::empty_input, "no scores");
    double sum = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d1 = gold[i].topic_relevance - pred[i].topic_relevance;
        const double d2 = gold[i].instruction_clarity - pred[i].instruction_clarity;
        const double d3 = gold[i].recording_quality - pred[i].recording_quality;
        sum += d1 * d1 + d2 * d2 + d3 * d3;
    }
    return sum / static_cast<double>(pred.size());
}

scored_video parse_score_response(std::string_view text) {
    auto found = find_json(text, '{');
    if (!found) throw error(errc::parse_error, "no JSON object in score response");
    const json& root = found->value;
    const json& scores = root.contains("scores") ? root["scores"] : root;
    if (!scores.is_object()) throw error(errc::parse_error, "\"scores\" is not an object");

    auto read_dim = [&](const char* name, double& value, std::string& reasoning) {
        auto it = scores.find(name);
        if (it == scores.end()) throw error(errc::parse_error, std::string("missing ") + name, name);
        const json* raw = &*it;
        if (it->is_object()) {
            if (auto r = it->find("reasoning"); r != it->end() && r->is_string()) reasoning = r->get<std::string>();
            auto s = it->find("score");
            if (s == it->end()) throw error(errc::parse_error, std::string("missing ") + name + ".score", name);
            raw = &*s;
        }
        if (!json_to_double(*raw, value)) throw error(errc::parse_error, std::string(name) + " is not numeric", name);
        if (value < 1.0 || value > 5.0) {
            throw error(errc::parse_error, std::string(name) + " outside the 1-5 rubric", name);
        }
    };
    scored_video out;
    read_dim("topic_relevance", out.score.topic_relevance, out.topic_reasoning);
    read_dim("instruction_clarity", out.score.instruction_clarity, out.clarity_reasoning);
    read_dim("recording_quality", out.score.recording_quality, out.recording_reasoning);
    if (auto s = root.find("overall_summary"); s != root.end() && s->is_string()) out.summary = s->get<std::string>();
    return out;
}

backend::request build_score_request(const video_metadata& meta, const clip_range& clip) {
    backend::request r;
    r.target = backend::stage::score;
    const std::string meta_json = guitraj::to_json(meta).dump(2);
    r.prompt = std::string(prompts::score_video) + "\n\n# Video Metadata\n\n" + meta_json;
    r.attachments.push_back({backend::attachment::kind::clip, meta.video_id, clip.start, clip.end});
    r.context = guitraj::to_json(meta).dump();
    return r;
}

scored_video score_video(const video_metadata& meta, const clip_range& clip, backend::client& client) {
    return parse_score_response(client.call(build_score_request(meta, clip)));
}

json to_json(const scoring_decision& d) {
    json j = {{"video_id", d.video_id}};
    if (d.score) {
        j["topic_relevance"] = number_json(d.score->topic_relevance);
        j["instruction_clarity"] = number_json(d.score->instruction_clarity);
        j["recording_quality"] = number_json(d.score->recording_quality);
    } else {
        j["topic_relevance"] = nullptr;
        j["instruction_clarity"] = nullptr;
        j["recording_quality"] = nullptr;
    }
    j["passed"] = d.passed;
    if (d.gated_by) j["gated_by"] = *d.gated_by;
    return j;
}

}  // namespace guitraj::scorer
