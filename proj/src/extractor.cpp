#include "guitraj/extractor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>

#include "guitraj/error.hpp"
#include "guitraj/prompts.hpp"
#include "guitraj/text_json.hpp"

namespace guitraj::extractor {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct line_span {
    std::string_view text;
    std::size_t offset;
};

std::vector<line_span> split_lines(std::string_view text) {
    std::vector<line_span> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        out.push_back({text.substr(pos, nl - pos), pos});
        pos = nl + 1;
    }
    return out;
}

const std::set<std::string> task_fields = {"task_id", "instruction", "dense_caption", "plan", "platform",
                                           "software", "website", "user_actions", "complete"};
const std::set<std::string> action_fields = {"timestamp",         "action_type", "grounding_instruction",
                                             "action_reason",     "action_parameters",
                                             "core_change_reason", "core_change"};

json collect_unknown(const json& task) {
    json extra = json::object();
    for (const auto& [k, v] : task.items()) {
        if (!task_fields.count(k)) extra[k] = v;
    }
    if (auto it = task.find("user_actions"); it != task.end() && it->is_array()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& a = (*it)[i];
            if (!a.is_object()) continue;
            for (const auto& [k, v] : a.items()) {
                if (!action_fields.count(k)) extra["user_actions[" + std::to_string(i) + "]." + k] = v;
            }
        }
    }
    return extra;
}

bool is_task_list(const json& v) {
    if (!v.is_array()) return false;
    return std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_object(); });
}

}  // namespace

std::vector<segment> segment_video(const std::string& video_id, double duration, double window) {
    if (!(duration > 0) || !std::isfinite(duration)) throw error(errc::nonpositive_duration, "duration must be positive");
    if (!(window > 0)) throw error(errc::invalid_argument, "window must be positive");
    auto count = static_cast<long long>(std::ceil(duration / window));
    while (count > 1 && window * static_cast<double>(count - 1) >= duration) --count;
    while (window * static_cast<double>(count) < duration) ++count;
    std::vector<segment> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long long j = 1; j <= count; ++j) {
        const double start = window * static_cast<double>(j - 1);
        const double end = j == count ? duration : std::min(window * static_cast<double>(j), duration);
        out.push_back({video_id, static_cast<int>(j), start, end});
    }
    return out;
}

std::string serialize_history(const std::vector<task_annotation>& tasks) {
    std::vector<const task_annotation*> sorted;
    for (const auto& t : tasks) sorted.push_back(&t);
    std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->task_id < b->task_id; });
    json arr = json::array();
    for (const auto* t : sorted) arr.push_back(to_json(*t));
    return arr.dump(2);
}

backend::request build_extraction_request(const extraction_context& ctx) {
    if (ctx.seg.index == 1 && !ctx.prior_tasks.empty()) {
        throw error(errc::history_for_first_segment, "segment 1 cannot carry annotation history");
    }
    if (ctx.seg.video_id != ctx.video_id) throw error(errc::invalid_argument, "segment belongs to another video");
    backend::request r;
    r.target = backend::stage::extract;
    r.attachments.push_back({backend::attachment::kind::clip, ctx.video_id, ctx.seg.start, ctx.seg.end});
    if (ctx.seg.index == 1) {
        r.prompt = std::string(prompts::extract_trajectory);
        return r;
    }
    const std::string history = serialize_history(ctx.prior_tasks);
    std::string p(prompts::continue_extraction);
    p = prompts::replace_all(p, "[Current Start Time]", format_timestamp(ctx.seg.start));
    p = prompts::replace_all(p, "[Current End Time]", format_timestamp(ctx.seg.end));
    p = prompts::replace_all(p, "**[Insert Previous Analysis History Here]**", history);
    p = prompts::replace_all(p, "**[Insert Specific Task Prompt Here]**", prompts::extract_trajectory);
    r.prompt = std::move(p);
    r.context = history;
    return r;
}

annotation_response parse_annotation_response(std::string_view text, parse_options options) {
    annotation_response out;
    const auto lines = split_lines(text);

    std::size_t header = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lower(lines[i].text).find("shot splitting") != std::string::npos) {
            header = i;
            break;
        }
    }
    if (header == lines.size()) throw error(errc::missing_shot_section, "no \"Shot Splitting\" section");

    static const std::regex shot_re(
        R"(^\s*\d+[.)]\s*\[?\s*(\S+?)\s*(?:-|~|to|)" "\xE2\x80\x93|\xE2\x80\x94" R"()\s*(\S+?)\s*\]?\s*$)");
    std::size_t list_end = lines[header].offset + lines[header].text.size();
    bool started = false;
    for (std::size_t i = header + 1; i < lines.size(); ++i) {
        const std::string line(lines[i].text);
        if (trim(line).empty()) {
            if (started) break;
            continue;
        }
        std::smatch m;
        if (!std::regex_match(line, m, shot_re)) break;
        started = true;
        const std::string path = "shots[" + std::to_string(out.shots.size()) + "]";
        shot s;
        try {
            s.start = parse_timestamp(m[1].str());
            s.end = parse_timestamp(m[2].str());
        } catch (const error& e) {
            throw error(errc::timestamp_error, path + ": " + e.what(), path);
        }
        if (!(s.start < s.end)) throw error(errc::timestamp_error, path + ": start must precede end", path);
        if (!out.shots.empty() && s.start < out.shots.back().start) {
            throw error(errc::timestamp_error, path + ": shots out of order", path);
        }
        out.shots.push_back(s);
        list_end = lines[i].offset + lines[i].text.size();
    }
    if (out.shots.empty()) throw error(errc::missing_shot_section, "\"Shot Splitting\" header has no numbered shots");

    std::optional<located_json> found;
    for (std::size_t from = list_end;;) {
        auto candidate = find_json(text, '[', from);
        if (!candidate) break;
        if (is_task_list(candidate->value)) {
            found = std::move(candidate);
            break;
        }
        from = candidate->begin + 1;
    }
    if (!found && !options.strict) {
        for (std::size_t from = 0; from < lines[header].offset;) {
            auto candidate = find_json(text.substr(0, lines[header].offset), '[', from);
            if (!candidate) break;
            if (is_task_list(candidate->value)) {
                found = std::move(candidate);
                break;
            }
            from = candidate->begin + 1;
        }
    }
    if (!found) throw error(errc::missing_json, "no JSON task list after the shot section");
    if (options.strict) {
        if (!trim(text.substr(list_end, found->begin - list_end)).empty() || !trim(text.substr(found->end)).empty()) {
            throw error(errc::missing_json, "strict mode: text surrounds the JSON task list");
        }
    }

    const json& arr = found->value;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        out.tasks.push_back(task_annotation_from_json(arr[i], "[" + std::to_string(i) + "]"));
        out.unknown_fields.push_back(collect_unknown(arr[i]));
    }
    return out;
}

std::string render_annotation_response(const shot_list& shots, const std::vector<task_annotation>& tasks) {
    std::string out = "Shot Splitting\n";
    for (std::size_t i = 0; i < shots.size(); ++i) {
        out += std::to_string(i + 1) + ". " + format_timestamp(shots[i].start.seconds) + " - " +
               format_timestamp(shots[i].end.seconds) + "\n";
    }
    json arr = json::array();
    for (const auto& t : tasks) arr.push_back(to_json(t));
    out += "\n```json\n" + arr.dump(4) + "\n```\n";
    return out;
}

std::vector<task_annotation> merge_segments(const std::vector<task_annotation>& prior,
                                            const std::vector<task_annotation>& fresh) {
    for (std::size_t i = 1; i < prior.size(); ++i) {
        if (prior[i].task_id <= prior[i - 1].task_id) {
            throw error(errc::invalid_argument, "prior task ids must be strictly increasing");
        }
    }
    for (std::size_t i = 1; i < fresh.size(); ++i) {
        if (fresh[i].task_id < fresh[i - 1].task_id) {
            throw error(errc::invalid_argument, "new task ids must be non-decreasing");
        }
    }
    std::vector<task_annotation> result = prior;
    std::set<int> used;
    for (const auto& t : prior) used.insert(t.task_id);

    for (const auto& t : fresh) {
        if (!result.empty() && result.back().task_id == t.task_id && !result.back().complete) {
            auto& open = result.back();
            if (!open.user_actions.empty() && !t.user_actions.empty() &&
                t.user_actions.front().at < open.user_actions.back().at) {
                throw error(errc::timestamp_regression,
                            "task " + std::to_string(t.task_id) + " continues at " +
                                format_timestamp(t.user_actions.front().at.seconds) + " before " +
                                format_timestamp(open.user_actions.back().at.seconds));
            }
            open.user_actions.insert(open.user_actions.end(), t.user_actions.begin(), t.user_actions.end());
            open.refresh_complete();
            continue;
        }
        if (used.count(t.task_id)) {
            throw error(errc::task_id_conflict, "task id " + std::to_string(t.task_id) + " is already complete");
        }
        const int next_id = result.empty() ? 0 : result.back().task_id + 1;
        if (t.task_id != next_id) {
            throw error(errc::task_id_conflict,
                        "new task id " + std::to_string(t.task_id) + ", expected " + std::to_string(next_id));
        }
        task_annotation fresh_task = t;
        fresh_task.refresh_complete();
        result.push_back(std::move(fresh_task));
        used.insert(t.task_id);
    }
    return result;
}

bool is_browser(std::string_view software) {
    const std::string s = lower(software);
    for (const char* name : {"chrome", "firefox", "safari", "edge", "opera", "brave", "browser", "chromium", "vivaldi",
                             "internet explorer", "samsung internet"}) {
        if (s.find(name) != std::string::npos) return true;
    }
    return false;
}

json to_json(const task_report& r) {
    auto list = [](const std::vector<violation>& vs) {
        json arr = json::array();
        for (const auto& v : vs) arr.push_back({{"code", v.code}, {"where", v.param}, {"detail", v.detail}});
        return arr;
    };
    return {{"task_id", r.task_id},
            {"complete", r.complete},
            {"retained", r.retained()},
            {"violations", list(r.violations)},
            {"warnings", list(r.warnings)}};
}

std::vector<task_report> validate_trajectory(const std::vector<task_annotation>& tasks, double video_duration) {
    std::vector<task_report> reports;
    for (const auto& t : tasks) {
        task_report rep;
        rep.task_id = t.task_id;
        rep.complete = !t.user_actions.empty() && t.user_actions.back().action_type == "finish";
        if (t.user_actions.empty()) rep.violations.push_back({"EMPTY_TASK", "", "task has no actions"});
        for (std::size_t i = 0; i < t.user_actions.size(); ++i) {
            const auto& a = t.user_actions[i];
            const std::string where = "user_actions[" + std::to_string(i) + "]";
            if (a.at.seconds < 0 || a.at.seconds > video_duration) {
                rep.violations.push_back({"OUT_OF_RANGE", where,
                                          format_timestamp(a.at.seconds) + " outside [00:00, " +
                                              format_timestamp(video_duration) + "]"});
            }
            if (i > 0 && a.at < t.user_actions[i - 1].at) {
                rep.violations.push_back({"TIMESTAMP_REGRESSION", where, "timestamp earlier than previous action"});
            }
            for (const auto& v : validate_action(t.os, a).violations) {
                rep.violations.push_back({v.code, v.param.empty() ? where : where + "." + v.param, v.detail});
            }
            if (a.action_type == "finish" && i + 1 != t.user_actions.size()) {
                rep.violations.push_back({"FINISH_NOT_LAST", where, "finish must be the final action"});
            }
        }
        if (t.website && !is_browser(t.software)) {
            rep.warnings.push_back({"WEBSITE_NON_BROWSER", "website", "'" + t.software + "' is not a known browser"});
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace guitraj::extractor
