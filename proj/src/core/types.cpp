#include "guitraj/core/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "guitraj/error.hpp"

namespace guitraj {
namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
    throw error(errc::json_schema_error, what + " at '" + path + "'", path);
}

const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) schema_fail(path, "expected object");
    auto it = j.find(key);
    if (it == j.end()) schema_fail(join(path, key), "missing field");
    return *it;
}

std::string str_field(const json& j, const std::string& key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_string()) schema_fail(join(path, key), "expected string");
    return v.get<std::string>();
}

std::string str_field_or(const json& j, const std::string& key, const std::string& path, std::string fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_string()) schema_fail(join(path, key), "expected string");
    return it->get<std::string>();
}

std::optional<std::string> opt_str(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) schema_fail(join(path, key), "expected string or null");
    return it->get<std::string>();
}

double num_field(const json& j, const std::string& key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_number()) schema_fail(join(path, key), "expected number");
    return v.get<double>();
}

int int_field(const json& j, const std::string& key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_number_integer()) schema_fail(join(path, key), "expected integer");
    return v.get<int>();
}

json opt_json(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

json to_json(const rel_point& p) { return json::array({p.y, p.x}); }
json to_json(const rel_bbox& b) { return json::array({b.y1, b.x1, b.y2, b.x2}); }
json to_json(const pixel_point& p) { return {{"x", p.x}, {"y", p.y}}; }
json to_json(const pixel_bbox& b) { return {{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}}; }

std::vector<int> ints(const json& j, std::size_t n, const std::string& path) {
    if (!j.is_array() || j.size() != n) schema_fail(path, "expected array of " + std::to_string(n) + " integers");
    std::vector<int> out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) schema_fail(path, "expected integer");
        out.push_back(v.get<int>());
    }
    return out;
}

}  // namespace

double quality_score::min_dimension() const {
    return std::min({topic_relevance, instruction_clarity, recording_quality});
}

void task_annotation::refresh_complete() {
    complete = !user_actions.empty() && user_actions.back().action_type == "finish";
}

std::string_view task_kind_name(task_kind k) noexcept {
    switch (k) {
        case task_kind::grounding: return "grounding";
        case task_kind::action_prediction: return "action_prediction";
        case task_kind::trajectory_modeling: return "trajectory_modeling";
    }
    return "?";
}

std::optional<task_kind> parse_task_kind(std::string_view name) {
    for (auto k : {task_kind::grounding, task_kind::action_prediction, task_kind::trajectory_modeling}) {
        if (task_kind_name(k) == name) return k;
    }
    return std::nullopt;
}

json to_json(const video_metadata& v) {
    return {{"video_id", v.video_id},       {"title", v.title},
            {"description", v.description}, {"keywords", v.keywords},
            {"channel", v.channel},         {"category", v.category},
            {"subtitles", opt_json(v.subtitles)}, {"duration", number_json(v.duration)}};
}

video_metadata video_metadata_from_json(const json& j) {
    video_metadata v;
    v.video_id = str_field(j, "video_id", "");
    if (v.video_id.empty()) schema_fail("video_id", "empty video_id");
    v.title = str_field_or(j, "title", "", "");
    v.description = str_field_or(j, "description", "", "");
    if (auto it = j.find("keywords"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) schema_fail("keywords", "expected array");
        for (const auto& k : *it) {
            if (!k.is_string()) schema_fail("keywords", "expected strings");
            v.keywords.push_back(k.get<std::string>());
        }
    }
    v.channel = str_field_or(j, "channel", "", "");
    v.category = str_field_or(j, "category", "", "");
    v.subtitles = opt_str(j, "subtitles", "");
    v.duration = num_field(j, "duration", "");
    if (!(v.duration >= 0) || !std::isfinite(v.duration)) schema_fail("duration", "duration must be >= 0");
    return v;
}

json to_json(const quality_score& q) {
    return {{"topic_relevance", number_json(q.topic_relevance)},
            {"instruction_clarity", number_json(q.instruction_clarity)},
            {"recording_quality", number_json(q.recording_quality)}};
}

quality_score quality_score_from_json(const json& j) {
    quality_score q{num_field(j, "topic_relevance", ""), num_field(j, "instruction_clarity", ""),
                    num_field(j, "recording_quality", "")};
    for (double d : {q.topic_relevance, q.instruction_clarity, q.recording_quality}) {
        if (!(d >= 1 && d <= 5)) schema_fail("", "score outside [1,5]");
    }
    return q;
}

json to_json(const segment& s) {
    return {{"video_id", s.video_id}, {"index", s.index}, {"start", number_json(s.start)}, {"end", number_json(s.end)}};
}

segment segment_from_json(const json& j) {
    return {str_field(j, "video_id", ""), int_field(j, "index", ""), num_field(j, "start", ""), num_field(j, "end", "")};
}

json to_json(const user_action& a) {
    json params = json::object();
    for (const auto& [name, value] : a.action_parameters) params[name] = to_json(value);
    return {{"timestamp", format_timestamp(a.at.seconds)},
            {"action_type", a.action_type},
            {"grounding_instruction", a.grounding_instruction},
            {"action_reason", a.action_reason},
            {"action_parameters", std::move(params)},
            {"core_change_reason", a.core_change_reason},
            {"core_change", a.core_change}};
}

user_action user_action_from_json(const json& j, std::optional<platform_class> cls, const std::string& path) {
    if (!j.is_object()) schema_fail(path, "expected object");
    user_action a;
    const json& ts = field(j, "timestamp", path);
    if (!ts.is_string()) {
        throw error(errc::timestamp_error, "timestamp must be an mm:ss string at '" + join(path, "timestamp") + "'",
                    join(path, "timestamp"));
    }
    try {
        a.at = parse_timestamp(ts.get<std::string>());
    } catch (const error& e) {
        throw error(errc::timestamp_error, std::string(e.what()) + " at '" + join(path, "timestamp") + "'",
                    join(path, "timestamp"));
    }
    a.action_type = str_field(j, "action_type", path);
    if (cls) {
        if (auto canon = canonical_action_name(*cls, a.action_type)) a.action_type = *canon;
    }
    a.grounding_instruction = str_field_or(j, "grounding_instruction", path, "");
    a.action_reason = str_field_or(j, "action_reason", path, "");
    a.core_change_reason = str_field_or(j, "core_change_reason", path, "");
    a.core_change = str_field_or(j, "core_change", path, "");

    const action_spec* spec = cls ? find_action(*cls, a.action_type) : nullptr;
    if (auto it = j.find("action_parameters"); it != j.end() && !it->is_null()) {
        const std::string ppath = join(path, "action_parameters");
        if (!it->is_object()) schema_fail(ppath, "expected object");
        for (const auto& [name, raw] : it->items()) {
            if (raw.is_null()) continue;
            const param_spec* ps = spec ? spec->find_param(name) : nullptr;
            param_value value;
            // Kind mismatches keep the shape-inferred value so validation can report them.
            if (ps && decode_param(raw, ps->kind, value)) {
                a.action_parameters.emplace(name, std::move(value));
            } else if (infer_param(raw, value)) {
                a.action_parameters.emplace(name, std::move(value));
            } else {
                a.action_parameters.emplace(name, raw.dump());
            }
        }
    }
    return a;
}

json to_json(const task_annotation& t) {
    json actions = json::array();
    for (const auto& a : t.user_actions) actions.push_back(to_json(a));
    return {{"task_id", t.task_id},
            {"instruction", t.instruction},
            {"dense_caption", t.dense_caption},
            {"plan", t.plan},
            {"platform", platform_name(t.os)},
            {"software", t.software},
            {"website", opt_json(t.website)},
            {"user_actions", std::move(actions)},
            {"complete", t.complete}};
}

task_annotation task_annotation_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) schema_fail(path, "expected task object");
    task_annotation t;
    t.task_id = int_field(j, "task_id", path);
    if (t.task_id < 0) schema_fail(join(path, "task_id"), "task_id must be >= 0");
    t.instruction = str_field(j, "instruction", path);
    t.dense_caption = str_field_or(j, "dense_caption", path, "");
    t.plan = str_field_or(j, "plan", path, "");
    const std::string pname = str_field(j, "platform", path);
    auto p = parse_platform(pname);
    if (!p) schema_fail(join(path, "platform"), "unknown platform '" + pname + "'");
    t.os = *p;
    t.software = str_field_or(j, "software", path, "");
    t.website = opt_str(j, "website", path);
    if (t.website && (t.website->empty() || lower(*t.website) == "null")) t.website.reset();
    const json& actions = field(j, "user_actions", path);
    const std::string apath = join(path, "user_actions");
    if (!actions.is_array()) schema_fail(apath, "expected array");
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const std::string ipath = apath + "[" + std::to_string(i) + "]";
        try {
            t.user_actions.push_back(user_action_from_json(actions[i], class_of(t.os), ipath));
        } catch (const error& e) {
            if (e.code() != errc::timestamp_error) throw;
            throw error(errc::timestamp_error,
                        "task_id " + std::to_string(t.task_id) + " action " + std::to_string(i) + ": " + e.what(),
                        e.path());
        }
    }
    t.refresh_complete();
    return t;
}

json to_json(const frame_ref& f) {
    return {{"video_id", f.video_id},
            {"time", number_json(f.time)},
            {"path", f.path},
            {"width", f.width},
            {"height", f.height}};
}

frame_ref frame_ref_from_json(const json& j) {
    return {str_field(j, "video_id", "frame"), num_field(j, "time", "frame"), str_field(j, "path", "frame"),
            int_field(j, "width", "frame"), int_field(j, "height", "frame")};
}

json to_json(const grounded_action& g) {
    json resolved = json::object();
    for (const auto& [name, r] : g.resolved) {
        resolved[name] = {{"rel_point", to_json(r.rel)},
                          {"rel_bbox", r.rel_box ? to_json(*r.rel_box) : json(nullptr)},
                          {"pixel_point", to_json(r.pixel)},
                          {"pixel_bbox", r.pixel_box ? to_json(*r.pixel_box) : json(nullptr)}};
    }
    return {{"action", to_json(g.base)},
            {"resolved", std::move(resolved)},
            {"source_frame_offset", number_json(g.source_frame_offset)},
            {"frame", to_json(g.frame)}};
}

grounded_action grounded_action_from_json(const json& j, platform_class cls) {
    grounded_action g;
    g.base = user_action_from_json(field(j, "action", ""), cls, "action");
    const json& resolved = field(j, "resolved", "");
    if (!resolved.is_object()) schema_fail("resolved", "expected object");
    for (const auto& [name, r] : resolved.items()) {
        const std::string p = "resolved." + name;
        resolved_param rp;
        auto rel = ints(field(r, "rel_point", p), 2, p + ".rel_point");
        rp.rel = {rel[0], rel[1]};
        const json& px = field(r, "pixel_point", p);
        rp.pixel = {int_field(px, "x", p + ".pixel_point"), int_field(px, "y", p + ".pixel_point")};
        if (auto it = r.find("rel_bbox"); it != r.end() && !it->is_null()) {
            auto b = ints(*it, 4, p + ".rel_bbox");
            rp.rel_box = rel_bbox{b[0], b[1], b[2], b[3]};
        }
        if (auto it = r.find("pixel_bbox"); it != r.end() && !it->is_null()) {
            const std::string bp = p + ".pixel_bbox";
            rp.pixel_box = pixel_bbox{int_field(*it, "x1", bp), int_field(*it, "y1", bp), int_field(*it, "x2", bp),
                                      int_field(*it, "y2", bp)};
        }
        g.resolved.emplace(name, rp);
    }
    g.source_frame_offset = num_field(j, "source_frame_offset", "");
    g.frame = frame_ref_from_json(field(j, "frame", ""));
    return g;
}

json to_json(const grounded_episode& e) {
    json steps = json::array();
    for (const auto& s : e.steps) steps.push_back(to_json(s));
    return {{"video_id", e.video_id},
            {"task_id", e.task_id},
            {"instruction", e.instruction},
            {"dense_caption", e.dense_caption},
            {"plan", e.plan},
            {"platform", platform_name(e.os)},
            {"software", e.software},
            {"website", opt_json(e.website)},
            {"complete", e.complete},
            {"steps", std::move(steps)}};
}

grounded_episode grounded_episode_from_json(const json& j) {
    grounded_episode e;
    e.video_id = str_field(j, "video_id", "");
    e.task_id = int_field(j, "task_id", "");
    e.instruction = str_field(j, "instruction", "");
    e.dense_caption = str_field_or(j, "dense_caption", "", "");
    e.plan = str_field_or(j, "plan", "", "");
    auto p = parse_platform(str_field(j, "platform", ""));
    if (!p) schema_fail("platform", "unknown platform");
    e.os = *p;
    e.software = str_field_or(j, "software", "", "");
    e.website = opt_str(j, "website", "");
    e.complete = field(j, "complete", "").get<bool>();
    const json& steps = field(j, "steps", "");
    if (!steps.is_array()) schema_fail("steps", "expected array");
    for (const auto& s : steps) e.steps.push_back(grounded_action_from_json(s, class_of(e.os)));
    return e;
}

json to_json(const training_sample& s) {
    json messages = json::array();
    for (const auto& m : s.messages) {
        json parts = json::array();
        for (const auto& p : m.parts) {
            const bool text = p.kind == message_part::type::text;
            parts.push_back({{"type", text ? "text" : "image"}, {text ? "text" : "image", p.content},
                             {"loss_masked", p.loss_masked}});
        }
        messages.push_back({{"role", m.role}, {"parts", std::move(parts)}});
    }
    return {{"task_kind", task_kind_name(s.kind)}, {"messages", std::move(messages)}, {"meta", s.meta}};
}

training_sample training_sample_from_json(const json& j) {
    training_sample s;
    auto kind = parse_task_kind(str_field(j, "task_kind", ""));
    if (!kind) schema_fail("task_kind", "unknown task kind");
    s.kind = *kind;
    for (const auto& m : field(j, "messages", "")) {
        message msg;
        msg.role = str_field(m, "role", "messages");
        for (const auto& p : field(m, "parts", "messages")) {
            message_part part;
            const std::string type = str_field(p, "type", "parts");
            part.kind = type == "image" ? message_part::type::image : message_part::type::text;
            part.content = str_field(p, type == "image" ? "image" : "text", "parts");
            part.loss_masked = field(p, "loss_masked", "parts").get<bool>();
            msg.parts.push_back(std::move(part));
        }
        s.messages.push_back(std::move(msg));
    }
    if (auto it = j.find("meta"); it != j.end()) s.meta = *it;
    return s;
}

validation_report validate_action(platform p, const user_action& action) {
    validation_report report;
    const action_spec* spec = find_action(class_of(p), action.action_type);
    if (!spec) {
        report.violations.push_back({"UNKNOWN_ACTION", "",
                                     "'" + action.action_type + "' is not a " +
                                         std::string(class_name(class_of(p))) + " action"});
        return report;
    }
    for (const param_spec* ps : spec->required_params()) {
        if (ps->spatial) continue;
        auto it = action.action_parameters.find(ps->name);
        if (it == action.action_parameters.end()) {
            report.violations.push_back({"MISSING_PARAM", ps->name, "required " + std::string(kind_name(ps->kind))});
            continue;
        }
        if (!holds_kind(it->second, ps->kind)) {
            report.violations.push_back({"WRONG_KIND", ps->name, "expected " + std::string(kind_name(ps->kind))});
            continue;
        }
        if (ps->kind == param_kind::enumeration) {
            const std::string v = lower(std::get<std::string>(it->second));
            if (std::find(ps->allowed.begin(), ps->allowed.end(), v) == ps->allowed.end()) {
                report.violations.push_back({"BAD_ENUM", ps->name, "'" + v + "' not allowed"});
            }
        } else if (ps->kind == param_kind::pointer_paths) {
            const auto& paths = std::get<pointer_paths>(it->second);
            bool ok = paths.size() >= 2;
            for (const auto& path : paths) ok = ok && path.path.size() >= 2;
            if (!ok) {
                report.violations.push_back(
                    {"BAD_POINTER_PATHS", ps->name, "need >= 2 pointers with >= 2 path points each"});
            }
        } else if (ps->kind == param_kind::key_list && std::get<string_list>(it->second).empty()) {
            report.violations.push_back({"WRONG_KIND", ps->name, "empty key list"});
        }
    }
    return report;
}

}  // namespace guitraj
