#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "guitraj/backend.hpp"
#include "guitraj/core/types.hpp"
#include "guitraj/extractor.hpp"
#include "guitraj/rng.hpp"

namespace guitraj::backend {
namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string start_key(const attachment& a) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "@%g", a.start.value_or(0));
    return a.ref + buf;
}

const attachment* first_media(const request& r) {
    for (const auto& a : r.attachments) {
        if (a.type != attachment::kind::none) return &a;
    }
    return nullptr;
}

std::string synth_classify(const request& r) {
    std::string text = lower(r.context.value_or(r.prompt));
    static const char* cues[] = {"tutorial", "how to", "how-to", "excel", "settings", "install", "guide",
                                 "walkthrough", "software", "android", "windows", "browser", "chrome",
                                 "configure", "setup", "app ", "spreadsheet", "shortcut"};
    int hits = 0;
    std::string found;
    for (const char* cue : cues) {
        if (text.find(cue) != std::string::npos) {
            ++hits;
            if (found.size() < 40) found += std::string(found.empty() ? "" : ", ") + "'" + cue + "'";
        }
    }
    json out;
    out["is_gui_content"] = hits > 0;
    out["confidence"] = hits > 0 ? std::min(0.95, 0.6 + 0.1 * hits) : 0.85;
    out["reasoning"] = hits > 0 ? "Metadata mentions " + found + "." : "No software or interface cues in the metadata.";
    return out.dump(2);
}

std::string synth_score(const request& r, std::uint64_t seed) {
    video_metadata meta;
    bool have_meta = false;
    if (r.context) {
        try {
            meta = video_metadata_from_json(json::parse(*r.context));
            have_meta = true;
        } catch (const std::exception&) {
        }
    }
    const std::string id = have_meta ? meta.video_id : digest(r);
    const std::string blob = lower(meta.title + " " + meta.description);
    const bool tutorial = blob.find("tutorial") != std::string::npos || blob.find("how to") != std::string::npos ||
                          blob.find("guide") != std::string::npos;
    rng gen(derive_seed(seed, "score|" + id));
    json scores = json::object();
    for (const char* dim : {"topic_relevance", "instruction_clarity", "recording_quality"}) {
        const double value = tutorial ? 4.2 + static_cast<double>(gen.below(9)) / 10.0
                                      : 2.0 + static_cast<double>(gen.below(16)) / 10.0;
        scores[dim] = {{"score", std::round(value * 10) / 10}, {"reasoning", tutorial ? "Clear on-screen steps." : "Little interface content."}};
    }
    json out = {{"scores", scores}, {"overall_summary", tutorial ? "Software walkthrough." : "Not a software demonstration."}};
    return "```json\n" + out.dump(2) + "\n```\n";
}

struct step_plan {
    std::string type;
    std::string instruction;
    std::string reason;
    param_map params;
};

std::vector<step_plan> desktop_steps(rng& gen) {
    std::vector<step_plan> pool = {
        {"click", "Click the 'File' menu in the top toolbar", "Open the menu with the export options", {}},
        {"write", "Type the file name into the name field", "Name the document", {{"text", std::string("report_q3")}}},
        {"hotkey", "Press Ctrl+S to save", "Save the current work", {{"keys", string_list{"ctrl", "s"}}}},
        {"doubleClick", "Double-click the cell B2", "Enter edit mode for the cell", {}},
        {"scroll", "Scroll down in the main sheet area", "Reveal the lower rows",
         {{"direction", std::string("down")}, {"magnitude_pixels", 300.0}}},
        {"rightClick", "Right-click the selected row header", "Open the context menu", {}},
        {"press", "Press Enter to confirm", "Commit the value", {{"key_name", std::string("enter")}}},
        {"dragTo", "Drag the column border to widen column A", "Make the text fit", {}},
    };
    gen.shuffle(pool);
    return pool;
}

std::vector<step_plan> mobile_steps(rng& gen) {
    std::vector<step_plan> pool = {
        {"click", "Tap the 'Display' entry in the settings list", "Open display options", {}},
        {"scroll", "Swipe up on the settings list", "Reveal more options", {{"direction", std::string("up")}}},
        {"input", "Type 'brightness' into the search box", "Search for the setting", {{"text", std::string("brightness")}}},
        {"long_press", "Long press the Wi-Fi tile", "Open the Wi-Fi details", {{"duration_ms", 800.0}}},
        {"press", "Press the Back key", "Return to the previous screen", {{"key", std::string("back")}}},
        {"open", "Open the Settings app", "Start from the settings home", {{"app", std::string("Settings")}}},
        {"pinch", "Pinch out on the map", "Zoom in on the area", {{"direction", std::string("out")}, {"magnitude_percent", 40.0}}},
    };
    gen.shuffle(pool);
    return pool;
}

std::string synth_extract(const request& r, const attachment& clip, std::uint64_t seed) {
    const double start = clip.start.value_or(0);
    const double end = clip.end.value_or(start + 60);
    std::vector<task_annotation> history;
    if (r.context) {
        try {
            for (const auto& t : json::parse(*r.context)) history.push_back(task_annotation_from_json(t));
        } catch (const std::exception&) {
            history.clear();
        }
    }
    const bool mobile = fnv1a64(clip.ref) % 2 == 1;
    rng gen(derive_seed(seed, "extract|" + start_key(clip)));
    const platform os = mobile ? platform::android : platform::windows;

    task_annotation task;
    if (!history.empty() && !history.back().complete) {
        task = history.back();
        task.user_actions.clear();
    } else {
        task.task_id = history.empty() ? 0 : history.back().task_id + 1;
        task.os = os;
        if (mobile) {
            task.instruction = "Turn on adaptive brightness in the Settings app";
            task.software = "Settings";
        } else if (gen.below(2) == 0) {
            task.instruction = "Create and save a quarterly report spreadsheet";
            task.software = "Microsoft Excel";
        } else {
            task.instruction = "Export the shared document from the web editor";
            task.software = "Google Chrome";
            task.website = "docs.google.com";
        }
        task.dense_caption = "The presenter works through the " + task.software + " interface step by step.";
        task.plan = "1. Open the relevant screen. 2. Make the change. 3. Confirm.";
    }

    // Integer-second action times inside the clip, at least 2 s apart.
    const long long first = static_cast<long long>(std::ceil(start)) + 1;
    const long long last = static_cast<long long>(std::floor(end)) - 1;
    const long long span = last - first;
    if (span < 0) {
        // Clip too short for any action: describe it and emit no tasks.
        return "Shot Splitting\n1. " + format_timestamp(start) + " - " + format_timestamp(std::max(end, start + 1)) +
               "\n\n```json\n[]\n```\n";
    }
    const bool open_ended = end - start >= 240 - 1e-9 && gen.below(2) == 0;
    const long long room = span / 2 + 1;
    const std::size_t wanted = static_cast<std::size_t>(std::min<long long>(room, 3 + gen.below(3)));
    auto steps = task.os == platform::android || task.os == platform::ios ? mobile_steps(gen) : desktop_steps(gen);
    const long long stride = wanted > 1 ? std::max<long long>(2, span / static_cast<long long>(wanted)) : 0;
    for (std::size_t i = 0; i < wanted; ++i) {
        const long long at = std::min(last, first + stride * static_cast<long long>(i));
        const bool finishing = !open_ended && i + 1 == wanted;
        user_action a;
        a.at = timestamp{static_cast<double>(at)};
        if (finishing) {
            a.action_type = "finish";
            a.grounding_instruction = "The task is complete";
            a.action_reason = "All steps are done";
            a.action_parameters = {{"status", std::string("success")}};
        } else {
            const auto& s = steps[i % steps.size()];
            a.action_type = s.type;
            a.grounding_instruction = s.instruction;
            a.action_reason = s.reason;
            a.action_parameters = s.params;
        }
        a.core_change_reason = "The screen reflects the action";
        a.core_change = finishing ? "No further change" : "The interface updates after: " + a.grounding_instruction;
        task.user_actions.push_back(std::move(a));
    }
    task.refresh_complete();

    extractor::shot_list shots;
    const double shot_len = std::max(1.0, std::floor((end - start) / 2));
    for (double s = std::floor(start); s < end; s += shot_len) {
        const double e = std::min(s + shot_len, end);
        if (std::floor(e) <= s) break;
        shots.push_back({timestamp{s}, timestamp{std::floor(e) == e ? e : std::floor(e)}});
    }
    if (shots.empty()) shots.push_back({timestamp{std::floor(start)}, timestamp{std::floor(start) + 1}});
    return extractor::render_annotation_response(shots, {task});
}

std::string synth_ground(const request& r, const attachment& frame, std::uint64_t seed, std::optional<bool> force) {
    json ctx = json::object();
    if (r.context) {
        try {
            ctx = json::parse(*r.context);
        } catch (const std::exception&) {
        }
    }
    std::vector<std::string> names;
    if (auto it = ctx.find("points_to_predict"); it != ctx.end() && it->is_array()) {
        for (const auto& n : *it) {
            if (n.is_string()) names.push_back(n.get<std::string>());
        }
    }
    if (names.empty()) names.push_back("point");
    const std::string action = ctx.value("action_type", std::string("click"));
    rng gen(derive_seed(seed, "ground|" + frame.ref + "|" + action + "|" + digest(r)));
    const bool ok = force.value_or(gen.unit() < 0.8);
    if (!ok) {
        return json{{"feasible", false}, {"reason", "The target element is not visible in this frame."}}.dump(2);
    }
    json preds = json::array();
    for (const auto& name : names) {
        const int y = 100 + static_cast<int>(gen.below(801));
        const int x = 100 + static_cast<int>(gen.below(801));
        const int h = 10 + static_cast<int>(gen.below(40));
        const int w = 20 + static_cast<int>(gen.below(60));
        auto tag = [](int v) { return std::to_string(v); };
        preds.push_back({{"point_name", name},
                         {"center_point", "<point>" + tag(y) + " " + tag(x) + "</point>"},
                         {"bounding_box", "<bbox>" + tag(std::max(0, y - h)) + " " + tag(std::max(0, x - w)) + " " +
                                              tag(std::min(1000, y + h)) + " " + tag(std::min(1000, x + w)) +
                                              "</bbox>"}});
    }
    return json{{"feasible", true}, {"predictions", preds}}.dump(2);
}

}  // namespace

mock_backend::mock_backend(fs::path fixture_dir, std::uint64_t seed) : fixture_dir_(std::move(fixture_dir)), seed_(seed) {
    if (!fixture_dir_.empty()) {
        const fs::path script = fixture_dir_ / "mock_script.json";
        if (fs::exists(script)) script_ = json::parse(read_file(script));
    }
}

std::optional<std::string> mock_backend::scripted(const request& r) {
    auto stage_it = script_.find(std::string(stage_name(r.target)));
    if (stage_it == script_.end() || !stage_it->is_object()) return std::nullopt;
    const attachment* media = first_media(r);
    if (!media) return std::nullopt;
    const json* entry = nullptr;
    std::string key;
    for (const std::string& candidate : {start_key(*media), media->ref}) {
        if (auto it = stage_it->find(candidate); it != stage_it->end()) {
            entry = &*it;
            key = candidate;
            break;
        }
    }
    if (!entry) {
        for (const auto& [k, v] : stage_it->items()) {
            if (!k.empty() && ends_with(media->ref, k)) {
                entry = &v;
                key = k;
                break;
            }
        }
    }
    if (!entry) return std::nullopt;
    if (entry->is_string()) return entry->get<std::string>();
    if (entry->is_array() && !entry->empty()) {
        std::lock_guard lock(mutex_);
        std::size_t& cursor = script_cursor_[std::string(stage_name(r.target)) + "|" + key];
        const json& v = (*entry)[std::min(cursor, entry->size() - 1)];
        ++cursor;
        if (v.is_string()) return v.get<std::string>();
    }
    return std::nullopt;
}

std::string mock_backend::synthesize(const request& r) const {
    const attachment* media = first_media(r);
    switch (r.target) {
        case stage::classify: return synth_classify(r);
        case stage::score: return synth_score(r, seed_);
        case stage::extract: return synth_extract(r, *media, seed_);
        case stage::ground: return synth_ground(r, *media, seed_, std::nullopt);
    }
    return {};
}

std::string mock_backend::call(const request& r) {
    ++calls_;
    check_request(r);
    if (!fixture_dir_.empty()) {
        const fs::path fixture = fixture_dir_ / std::string(stage_name(r.target)) / (digest(r) + ".txt");
        if (fs::exists(fixture)) return read_file(fixture);
    }
    if (auto text = scripted(r)) {
        if (text->rfind("@error:", 0) == 0) {
            const int status = std::stoi(text->substr(7));
            const auto kind = status == 401 || status == 403 ? call_failure::kind::auth
                              : status >= 500              ? call_failure::kind::server
                              : status == 0                ? call_failure::kind::transport
                                                           : call_failure::kind::client;
            throw call_failure(kind, status, "scripted failure " + std::to_string(status));
        }
        if (*text == "@feasible" || *text == "@infeasible") {
            if (r.target != stage::ground) throw call_failure(call_failure::kind::client, 400, "feasibility script on non-ground request");
            return synth_ground(r, *first_media(r), seed_, *text == "@feasible");
        }
        if (*text != "@synth") return *text;
    }
    return synthesize(r);
}

}  // namespace guitraj::backend
