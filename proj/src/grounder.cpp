#include "guitraj/grounder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <set>

#include "guitraj/error.hpp"
#include "guitraj/png.hpp"
#include "guitraj/prompts.hpp"
#include "guitraj/rng.hpp"
#include "guitraj/text_json.hpp"

namespace guitraj::grounder {
namespace {

std::vector<long long> tag_numbers(std::string_view text, const char* tag, std::size_t count) {
    const std::string open = std::string("<") + tag + ">";
    const std::string close = std::string("</") + tag + ">";
    const auto b = text.find(open);
    const auto e = text.find(close, b == std::string_view::npos ? 0 : b);
    if (b == std::string_view::npos || e == std::string_view::npos) {
        throw error(errc::tag_malformed, "expected " + open + "..." + close + " in '" + std::string(text) + "'");
    }
    static const std::regex number_list(R"(^\s*(-?\d+)(?:\s*,?\s*(-?\d+))?(?:\s*,?\s*(-?\d+))?(?:\s*,?\s*(-?\d+))?\s*$)");
    const std::string body(text.substr(b + open.size(), e - b - open.size()));
    std::smatch m;
    if (!std::regex_match(body, m, number_list)) {
        throw error(errc::tag_malformed, "non-integer content in " + open + ": '" + body + "'");
    }
    std::vector<long long> out;
    for (std::size_t i = 1; i < m.size() && m[i].matched; ++i) out.push_back(std::stoll(m[i].str()));
    if (out.size() != count) {
        throw error(errc::tag_malformed, open + " needs " + std::to_string(count) + " integers");
    }
    for (long long v : out) {
        if (v < 0 || v > 1000) throw error(errc::out_of_range, std::to_string(v) + " outside [0,1000] in " + open);
    }
    return out;
}

int to_pixel(int rel, int size) {
    const long long scaled = std::llround(static_cast<double>(rel) * size / 1000.0);
    return static_cast<int>(std::clamp<long long>(scaled, 0, size - 1));
}

std::string time_ms(double time) { return std::to_string(std::llround(time * 1000.0)); }

std::string substitute(std::string tmpl, const std::map<std::string, std::string>& vars) {
    for (const auto& [k, v] : vars) tmpl = prompts::replace_all(tmpl, "{" + k + "}", v);
    return tmpl;
}

// Single-quoted for /bin/sh.
std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out.push_back(c);
        }
    }
    return out + "'";
}

}  // namespace

std::vector<double> plan_frame_times(double t, double duration, double offset) {
    if (!(t >= 0 && t <= duration)) throw error(errc::invalid_argument, "action time outside the video");
    std::vector<double> out;
    for (double candidate : {t - offset, t, t + offset}) {
        const double c = std::clamp(candidate, 0.0, duration);
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    return out;
}

rel_point parse_point_tag(std::string_view text) {
    auto v = tag_numbers(text, "point", 2);
    return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

rel_bbox parse_bbox_tag(std::string_view text) {
    auto v = tag_numbers(text, "bbox", 4);
    rel_bbox b{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
    if (b.y1 > b.y2 || b.x1 > b.x2) throw error(errc::bbox_inverted, "bbox corners out of order");
    return b;
}

pixel_point rel_to_pixel(const rel_point& p, int width, int height) {
    if (width <= 0 || height <= 0) throw error(errc::invalid_argument, "frame dimensions must be positive");
    return {to_pixel(p.x, width), to_pixel(p.y, height)};
}

pixel_bbox rel_to_pixel(const rel_bbox& b, int width, int height) {
    if (width <= 0 || height <= 0) throw error(errc::invalid_argument, "frame dimensions must be positive");
    return {to_pixel(b.x1, width), to_pixel(b.y1, height), to_pixel(b.x2, width), to_pixel(b.y2, height)};
}

grounding_outcome parse_grounding_response(std::string_view text, const std::vector<std::string>& expected_names) {
    auto found = find_json(text, '{');
    if (!found) throw error(errc::parse_error, "no JSON object in grounding response");
    const json& root = found->value;
    auto f = root.find("feasible");
    if (f == root.end() || !f->is_boolean()) throw error(errc::parse_error, "\"feasible\" must be a boolean");
    if (!f->get<bool>()) {
        auto r = root.find("reason");
        if (r == root.end() || !r->is_string()) throw error(errc::parse_error, "infeasible answer needs a reason");
        return infeasible{r->get<std::string>()};
    }
    auto preds = root.find("predictions");
    if (preds == root.end() || !preds->is_array()) throw error(errc::parse_error, "\"predictions\" must be a list");
    feasible out;
    for (const auto& p : *preds) {
        if (!p.is_object()) throw error(errc::parse_error, "prediction is not an object");
        auto name = p.find("point_name");
        auto center = p.find("center_point");
        auto box = p.find("bounding_box");
        if (name == p.end() || !name->is_string() || center == p.end() || !center->is_string() || box == p.end() ||
            !box->is_string()) {
            throw error(errc::parse_error, "prediction needs point_name, center_point and bounding_box strings");
        }
        const std::string n = name->get<std::string>();
        if (std::find(expected_names.begin(), expected_names.end(), n) == expected_names.end()) {
            throw error(errc::name_mismatch, "unexpected point_name '" + n + "'");
        }
        if (out.predictions.count(n)) throw error(errc::name_mismatch, "duplicate point_name '" + n + "'");
        out.predictions.emplace(n, prediction{parse_point_tag(center->get<std::string>()),
                                              parse_bbox_tag(box->get<std::string>())});
    }
    for (const auto& n : expected_names) {
        if (!out.predictions.count(n)) throw error(errc::name_mismatch, "missing point_name '" + n + "'");
    }
    if (out.predictions.empty()) throw error(errc::parse_error, "feasible answer without predictions");
    return out;
}

backend::request build_grounding_request(const user_action& action, const frame_ref& frame,
                                         const std::vector<std::string>& point_names) {
    const json names = point_names;
    std::string action_slot = action.action_type + "\n\npoints_to_predict: " + names.dump();
    std::string p(prompts::ground_action);
    p = prompts::replace_all(p, "{grounding_instruction}", action.grounding_instruction);
    p = prompts::replace_all(p, "{action_type}", action_slot);
    backend::request r;
    r.target = backend::stage::ground;
    r.prompt = std::move(p);
    r.attachments.push_back({backend::attachment::kind::frame, frame.path, frame.time, std::nullopt});
    r.context = json{{"action_type", action.action_type}, {"points_to_predict", names}}.dump();
    return r;
}

directory_frames::directory_frames(fs::path root, directory_frames_options options)
    : root_(std::move(root)), options_(std::move(options)) {}

fs::path directory_frames::relative_path(const std::string& video_id, double time) {
    return fs::path(safe_name(video_id)) / (time_ms(time) + ".png");
}

std::optional<frame_ref> directory_frames::frame_at(const std::string& video_id, double time) {
    const fs::path rel = relative_path(video_id, time);
    const fs::path full = root_ / rel;
    std::error_code ec;
    if (!fs::exists(full, ec) && !options_.extract_command.empty()) {
        fs::create_directories(full.parent_path());
        char time_text[32];
        std::snprintf(time_text, sizeof time_text, "%.3f", time);
        const std::string cmd = substitute(options_.extract_command, {{"video_id", shell_quote(video_id)},
                                                                      {"time", time_text},
                                                                      {"time_ms", time_ms(time)},
                                                                      {"output", shell_quote(full.string())}});
        if (std::system(cmd.c_str()) != 0) {
            // fall through to synthesis or a missing frame
        }
    }
    if (!fs::exists(full, ec) && options_.synthesize) {
        const auto shade = static_cast<std::uint8_t>(160 + fnv1a64(video_id) % 64);
        png::write(full, png::filled(options_.width, options_.height, shade, shade, shade));
    }
    auto size = png::read_size(full);
    if (!size) return std::nullopt;
    return frame_ref{video_id, time, rel.generic_string(), size->first, size->second};
}

action_grounding ground_action(const user_action& action, platform os, const std::vector<frame_ref>& frames,
                               backend::client& client) {
    action_grounding result;
    const auto names = spatial_param_names(os, action.action_type);
    if (names.empty()) throw error(errc::invalid_argument, "action has no spatial parameters");
    for (const auto& frame : frames) {
        ++result.backend_calls;
        grounding_outcome outcome;
        try {
            outcome = parse_grounding_response(client.call(build_grounding_request(action, frame, names)), names);
        } catch (const error& e) {
            if (e.code() == errc::auth_error) throw;
            result.attempts.push_back({frame.time, std::string("error: ") + e.what()});
            continue;
        }
        if (auto* no = std::get_if<infeasible>(&outcome)) {
            result.attempts.push_back({frame.time, "infeasible: " + no->reason});
            continue;
        }
        const auto& yes = std::get<feasible>(outcome);
        result.attempts.push_back({frame.time, "feasible"});
        grounded_action g;
        g.base = action;
        g.frame = frame;
        g.source_frame_offset = frame.time - action.at.seconds;
        for (const auto& [name, pred] : yes.predictions) {
            resolved_param rp;
            rp.rel = pred.center;
            rp.rel_box = pred.box;
            rp.pixel = rel_to_pixel(pred.center, frame.width, frame.height);
            rp.pixel_box = rel_to_pixel(pred.box, frame.width, frame.height);
            if (pred.center.y < pred.box.y1 || pred.center.y > pred.box.y2 || pred.center.x < pred.box.x1 ||
                pred.center.x > pred.box.x2) {
                result.warnings.push_back("BBOX_EXCLUDES_POINT: " + name);
            }
            g.resolved.emplace(name, rp);
        }
        result.grounded = std::move(g);
        return result;
    }
    return result;
}

json to_json(const action_audit& a) {
    json attempts = json::array();
    for (const auto& at : a.attempts) attempts.push_back({{"time", number_json(at.time)}, {"outcome", at.outcome}});
    return {{"index", a.index},
            {"action_type", a.action_type},
            {"disposition", a.disposition},
            {"backend_calls", a.backend_calls},
            {"frame_offset", a.frame_offset ? number_json(*a.frame_offset) : json(nullptr)},
            {"attempts", std::move(attempts)},
            {"warnings", a.warnings}};
}

trajectory_grounding ground_trajectory(const std::string& video_id, const task_annotation& task, double duration,
                                       frame_source& frames, backend::client& client, double offset) {
    trajectory_grounding out;
    if (task.user_actions.empty()) {
        out.rejected = "EMPTY_TASK";
        return out;
    }
    grounded_episode ep;
    ep.video_id = video_id;
    ep.task_id = task.task_id;
    ep.instruction = task.instruction;
    ep.dense_caption = task.dense_caption;
    ep.plan = task.plan;
    ep.os = task.os;
    ep.software = task.software;
    ep.website = task.website;
    ep.complete = task.complete;

    for (std::size_t i = 0; i < task.user_actions.size(); ++i) {
        const auto& action = task.user_actions[i];
        action_audit audit;
        audit.index = i;
        audit.action_type = action.action_type;
        const double t = std::clamp(action.at.seconds, 0.0, duration);
        const auto* spec = find_action(class_of(task.os), action.action_type);
        const bool spatial = spec && !spec->spatial_param_names().empty();
        if (!spatial) {
            if (auto frame = frames.frame_at(video_id, t)) {
                grounded_action g;
                g.base = action;
                g.frame = *frame;
                g.source_frame_offset = 0;
                ep.steps.push_back(std::move(g));
                audit.disposition = "passthrough";
                audit.frame_offset = 0.0;
            } else {
                audit.disposition = "discarded";
                audit.attempts.push_back({t, "error: frame unavailable"});
            }
            out.audit.push_back(std::move(audit));
            continue;
        }
        std::vector<frame_ref> planned;
        for (double ft : plan_frame_times(t, duration, offset)) {
            if (auto frame = frames.frame_at(video_id, ft)) {
                planned.push_back(*frame);
            } else {
                audit.attempts.push_back({ft, "error: frame unavailable"});
            }
        }
        auto result = planned.empty() ? action_grounding{} : ground_action(action, task.os, planned, client);
        audit.backend_calls = result.backend_calls;
        audit.attempts.insert(audit.attempts.end(), result.attempts.begin(), result.attempts.end());
        audit.warnings = result.warnings;
        if (result.grounded) {
            audit.disposition = "grounded";
            audit.frame_offset = result.grounded->source_frame_offset;
            ep.steps.push_back(std::move(*result.grounded));
        } else {
            audit.disposition = "discarded";
        }
        out.audit.push_back(std::move(audit));
    }
    if (ep.steps.empty()) {
        out.rejected = "ALL_DISCARDED";
        return out;
    }
    out.episode = std::move(ep);
    return out;
}

std::vector<audit_pick> sample_for_audit(const std::vector<grounded_episode>& episodes, std::size_t n,
                                         std::uint64_t seed) {
    std::vector<audit_pick> all;
    for (std::size_t e = 0; e < episodes.size(); ++e) {
        for (std::size_t s = 0; s < episodes[e].steps.size(); ++s) {
            for (const auto& [name, _] : episodes[e].steps[s].resolved) all.push_back({e, s, name});
        }
    }
    rng gen(seed);
    gen.shuffle(all);
    if (all.size() > n) all.resize(n);
    return all;
}

std::vector<fs::path> write_audit_overlays(const std::vector<grounded_episode>& episodes,
                                           const std::vector<audit_pick>& picks, const fs::path& frames_root,
                                           const fs::path& out_dir) {
    std::vector<fs::path> written;
    for (const auto& pick : picks) {
        const auto& ep = episodes.at(pick.episode);
        const auto& step = ep.steps.at(pick.step);
        const auto& rp = step.resolved.at(pick.param);
        const fs::path src = frames_root / step.frame.path;
        png::image img = fs::exists(src) ? png::read(src) : png::filled(step.frame.width, step.frame.height, 0, 0, 0);
        if (rp.pixel_box) draw_rect(img, rp.pixel_box->x1, rp.pixel_box->y1, rp.pixel_box->x2, rp.pixel_box->y2, 0, 255, 0);
        draw_cross(img, rp.pixel.x, rp.pixel.y, 6, 255, 0, 0);
        const fs::path out = out_dir / (safe_name(ep.video_id) + "_" + std::to_string(ep.task_id) + "_" +
                                        std::to_string(pick.step) + "_" + pick.param + ".png");
        png::write(out, img);
        written.push_back(out);
    }
    return written;
}

}  // namespace guitraj::grounder
