#include "guitraj/assembler.hpp"

#include <cstdio>
#include <set>

#include "guitraj/error.hpp"
#include "guitraj/hash.hpp"
#include "guitraj/prompts.hpp"
#include "guitraj/rng.hpp"

namespace guitraj::assembler {
namespace {

json rel_json(const rel_point& p) { return json::array({p.y, p.x}); }
json rel_json(const rel_bbox& b) { return json::array({b.y1, b.x1, b.y2, b.x2}); }

bool pick_second(const export_config& config, double weight, std::string_view key) {
    if (weight <= 0) return false;
    if (weight >= 1) return true;
    return rng(derive_seed(config.seed, key)).unit() < weight;
}

std::string sample_key(std::string_view kind, const grounded_episode& e, std::size_t step) {
    return std::string(kind) + "|" + e.video_id + "|" + std::to_string(e.task_id) + "|" + std::to_string(step);
}

message_part text_part(std::string text, bool masked) { return {message_part::type::text, std::move(text), masked}; }
message_part image_part(const frame_ref& f) { return {message_part::type::image, f.path, true}; }

json step_meta(const grounded_action& step, std::size_t index) {
    json pixels = json::object();
    for (const auto& [name, r] : step.resolved) {
        json p = {{"x", r.pixel.x}, {"y", r.pixel.y}};
        if (r.pixel_box) p["bbox"] = {r.pixel_box->x1, r.pixel_box->y1, r.pixel_box->x2, r.pixel_box->y2};
        pixels[name] = std::move(p);
    }
    return {{"step", index + 1},
            {"timestamp", format_timestamp(step.base.at.seconds)},
            {"frame", step.frame.path},
            {"frame_size", {step.frame.width, step.frame.height}},
            {"pixel", std::move(pixels)},
            {"core_change", step.base.core_change},
            {"core_change_reason", step.base.core_change_reason}};
}

json episode_meta(const grounded_episode& e) {
    return {{"video_id", e.video_id},
            {"task_id", e.task_id},
            {"platform", platform_name(e.os)},
            {"software", e.software},
            {"website", e.website ? json(*e.website) : json(nullptr)}};
}

std::string action_text(const grounded_action& step, bool thought) {
    const std::string target = json::array({action_target(step)}).dump();
    if (!thought) return target;
    return "Thought: " + step.base.action_reason + "\nAction: " + step.base.grounding_instruction + "\n\n```json\n" +
           target + "\n```";
}

}  // namespace

void export_config::validate() const {
    if (!grounding && !action_prediction && !trajectory_modeling) {
        throw error(errc::invalid_argument, "at least one export task must be enabled");
    }
    for (double w : {grounding_bbox_weight, action_thought_weight, trajectory_thought_weight}) {
        if (!(w >= 0 && w <= 1)) throw error(errc::invalid_argument, "template weights must lie in [0,1]");
    }
    if (shard_size == 0) throw error(errc::invalid_argument, "shard_size must be at least 1");
}

json action_target(const grounded_action& step) {
    json out = {{"action", step.base.action_type}};
    for (const auto& [name, value] : step.base.action_parameters) {
        if (step.resolved.count(name) || std::holds_alternative<box4>(value)) continue;
        out[name] = to_json(value);
    }
    for (const auto& [name, r] : step.resolved) out[name] = rel_json(r.rel);
    return out;
}

std::vector<training_sample> export_grounding_samples(const std::vector<grounded_episode>& episodes,
                                                      const export_config& config) {
    std::vector<training_sample> out;
    for (const auto& e : episodes) {
        for (std::size_t i = 0; i < e.steps.size(); ++i) {
            const auto& step = e.steps[i];
            if (step.resolved.empty()) continue;
            const bool bbox = pick_second(config, config.grounding_bbox_weight, sample_key("grounding", e, i));
            json target = json::array();
            for (const auto& [name, r] : step.resolved) {
                if (bbox) {
                    const rel_bbox b = r.rel_box.value_or(rel_bbox{r.rel.y, r.rel.x, r.rel.y, r.rel.x});
                    target.push_back({{"bbox_2d", rel_json(b)}, {"label", step.base.grounding_instruction}});
                } else {
                    target.push_back({{"point", rel_json(r.rel)}, {"label", step.base.grounding_instruction}});
                }
            }
            training_sample s;
            s.kind = task_kind::grounding;
            const auto& tmpl = bbox ? prompts::grounding_v2 : prompts::grounding_v1;
            s.messages.push_back({"user",
                                  {image_part(step.frame),
                                   text_part(prompts::format_positional(tmpl, {step.base.grounding_instruction}), true)}});
            s.messages.push_back({"assistant", {text_part(target.dump(), false)}});
            s.meta = episode_meta(e);
            s.meta["template"] = bbox ? 2 : 1;
            s.meta.update(step_meta(step, i));
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::vector<training_sample> export_action_prediction_samples(const std::vector<grounded_episode>& episodes,
                                                              const export_config& config) {
    std::vector<training_sample> out;
    for (const auto& e : episodes) {
        const std::string space = describe_action_space(class_of(e.os));
        std::string history;
        for (std::size_t i = 0; i < e.steps.size(); ++i) {
            const auto& step = e.steps[i];
            const bool thought = pick_second(config, config.action_thought_weight, sample_key("action", e, i));
            const auto& tmpl = thought ? prompts::action_prediction_v2 : prompts::action_prediction_v1;
            training_sample s;
            s.kind = task_kind::action_prediction;
            s.messages.push_back(
                {"user",
                 {image_part(step.frame), text_part(prompts::format_positional(tmpl, {space, e.instruction, history}), true)}});
            s.messages.push_back({"assistant", {text_part(action_text(step, thought), false)}});
            s.meta = episode_meta(e);
            s.meta["template"] = thought ? 2 : 1;
            s.meta.update(step_meta(step, i));
            out.push_back(std::move(s));
            if (!history.empty()) history += "\n";
            history += std::to_string(i + 1) + ". " + action_target(step).dump();
        }
    }
    return out;
}

std::vector<training_sample> export_trajectory_samples(const std::vector<grounded_episode>& episodes,
                                                       const export_config& config) {
    std::vector<training_sample> out;
    for (const auto& e : episodes) {
        if (!e.complete || e.steps.empty()) continue;
        const bool thought = pick_second(config, config.trajectory_thought_weight, sample_key("trajectory", e, 0));
        const auto& tmpl = thought ? prompts::trajectory_v2 : prompts::trajectory_v1;
        training_sample s;
        s.kind = task_kind::trajectory_modeling;
        s.messages.push_back({"user", {text_part(prompts::format_positional(tmpl, {e.instruction}), true)}});
        json steps = json::array();
        for (std::size_t i = 0; i < e.steps.size(); ++i) {
            s.messages.push_back({"user", {image_part(e.steps[i].frame)}});
            s.messages.push_back({"assistant", {text_part(action_text(e.steps[i], thought), false)}});
            steps.push_back(step_meta(e.steps[i], i));
        }
        s.meta = episode_meta(e);
        s.meta["template"] = thought ? 2 : 1;
        s.meta["steps"] = std::move(steps);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<training_sample> export_all(const std::vector<grounded_episode>& episodes, const export_config& config) {
    config.validate();
    std::vector<training_sample> out;
    auto append = [&](std::vector<training_sample> more) {
        out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    };
    if (config.grounding) append(export_grounding_samples(episodes, config));
    if (config.action_prediction) append(export_action_prediction_samples(episodes, config));
    if (config.trajectory_modeling) append(export_trajectory_samples(episodes, config));
    return out;
}

std::vector<std::string> missing_images(const std::vector<training_sample>& samples, const fs::path& frames_root) {
    std::set<std::string> seen;
    std::vector<std::string> missing;
    for (const auto& s : samples) {
        for (const auto& m : s.messages) {
            for (const auto& p : m.parts) {
                if (p.kind != message_part::type::image || !seen.insert(p.content).second) continue;
                std::error_code ec;
                if (!fs::is_regular_file(frames_root / p.content, ec)) missing.push_back(p.content);
            }
        }
    }
    return missing;
}

json to_json(const shard_manifest& m) {
    json shards = json::array();
    for (const auto& s : m.shards) {
        shards.push_back({{"file", s.file}, {"samples", s.samples}, {"bytes", s.bytes}, {"fnv1a64", s.checksum}});
    }
    return {{"shard_size", m.shard_size}, {"seed", m.seed}, {"counts", m.counts}, {"total", m.total},
            {"shards", std::move(shards)}};
}

shard_manifest shard_manifest_from_json(const json& j) {
    try {
        shard_manifest m;
        m.shard_size = j.at("shard_size").get<std::size_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.counts = j.at("counts").get<std::map<std::string, std::size_t>>();
        m.total = j.at("total").get<std::size_t>();
        for (const auto& s : j.at("shards")) {
            m.shards.push_back({s.at("file").get<std::string>(), s.at("samples").get<std::size_t>(),
                                s.at("bytes").get<std::size_t>(), s.at("fnv1a64").get<std::string>()});
        }
        return m;
    } catch (const json::exception& e) {
        throw error(errc::json_schema_error, std::string("shard manifest: ") + e.what());
    }
}

shard_manifest write_shards(std::vector<training_sample> samples, std::size_t shard_size, const fs::path& out_dir,
                            std::uint64_t seed) {
    if (shard_size == 0) throw error(errc::invalid_argument, "shard_size must be at least 1");
    fs::create_directories(out_dir);
    rng(seed).shuffle(samples);

    shard_manifest m;
    m.shard_size = shard_size;
    m.seed = seed;
    for (auto k : {task_kind::grounding, task_kind::action_prediction, task_kind::trajectory_modeling}) {
        m.counts[std::string(task_kind_name(k))] = 0;
    }
    for (const auto& s : samples) ++m.counts[std::string(task_kind_name(s.kind))];
    m.total = samples.size();

    std::set<std::string> written;
    for (std::size_t begin = 0; begin < samples.size(); begin += shard_size) {
        const std::size_t end = std::min(samples.size(), begin + shard_size);
        std::string body;
        for (std::size_t i = begin; i < end; ++i) body += to_json(samples[i]).dump() + "\n";
        char name[32];
        std::snprintf(name, sizeof name, "shard-%05zu.jsonl", m.shards.size());
        write_file_atomic(out_dir / name, body);
        written.insert(name);
        m.shards.push_back({name, end - begin, body.size(), hex64(fnv1a64(body))});
    }
    for (const auto& entry : fs::directory_iterator(out_dir)) {
        const std::string n = entry.path().filename().string();
        if (n.rfind("shard-", 0) == 0 && n.size() > 6 && !written.count(n)) fs::remove(entry.path());
    }
    write_file_atomic(out_dir / "manifest.json", to_json(m).dump(2) + "\n");
    return m;
}

}  // namespace guitraj::assembler
