#include "guitraj/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "guitraj/error.hpp"

namespace guitraj::stats {
namespace {

void add(counts& into, const counts& from) {
    for (const auto& [k, v] : from) into[k] += v;
}

std::string category_of(const category_map& map, const std::string& name) {
    auto it = map.find(fold_case(name));
    return it == map.end() ? "other" : it->second;
}

std::vector<std::pair<std::string, std::uint64_t>> ranked(const counts& c) {
    std::vector<std::pair<std::string, std::uint64_t>> rows(c.begin(), c.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return rows;
}

counts counts_from(const json& j, const char* key) {
    try {
        return j.at(key).get<counts>();
    } catch (const json::exception& e) {
        throw error(errc::json_schema_error, std::string("stats report: ") + e.what(), key);
    }
}

}  // namespace

std::string fold_case(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

category_map load_category_map(const fs::path& path) {
    category_map out;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        std::string l = line;
        if (!l.empty() && l.back() == '\r') l.pop_back();
        if (l.empty() || l[0] == '#') continue;
        const auto tab = l.find('\t');
        if (tab == std::string::npos) {
            throw error(errc::invalid_argument, path.string() + ":" + std::to_string(line_no) + ": expected name<TAB>category");
        }
        out[fold_case(l.substr(0, tab))] = l.substr(tab + 1);
    }
    return out;
}

std::optional<double> report::mean_steps() const {
    if (episodes == 0) return std::nullopt;
    return static_cast<double>(steps) / static_cast<double>(episodes);
}

report compute_stats(const std::vector<grounded_episode>& episodes, const category_map* categories) {
    report r;
    if (categories) {
        r.software_categories.emplace();
        r.website_categories.emplace();
    }
    for (const auto& e : episodes) {
        ++r.episodes;
        r.steps += e.steps.size();
        r.frames += e.steps.size();
        ++r.platforms[std::string(platform_name(e.os))];
        ++r.software[e.software];
        ++r.websites[e.website ? *e.website : "none"];
        ++r.steps_histogram[e.steps.size()];
        counts& actions = class_of(e.os) == platform_class::desktop ? r.desktop_actions : r.mobile_actions;
        for (const auto& s : e.steps) ++actions[s.base.action_type];
        if (!e.software.empty()) r.environments.insert(fold_case(e.software));
        if (e.website && !e.website->empty()) r.environments.insert(fold_case(*e.website));
        if (categories) {
            ++(*r.software_categories)[category_of(*categories, e.software)];
            ++(*r.website_categories)[e.website ? category_of(*categories, *e.website) : "none"];
        }
    }
    return r;
}

report merge(const report& a, const report& b) {
    report r = a;
    r.episodes += b.episodes;
    r.steps += b.steps;
    r.frames += b.frames;
    add(r.platforms, b.platforms);
    add(r.software, b.software);
    add(r.websites, b.websites);
    for (const auto& [k, v] : b.steps_histogram) r.steps_histogram[k] += v;
    add(r.desktop_actions, b.desktop_actions);
    add(r.mobile_actions, b.mobile_actions);
    r.environments.insert(b.environments.begin(), b.environments.end());
    for (auto [into, from] : {std::pair{&r.software_categories, &b.software_categories},
                              std::pair{&r.website_categories, &b.website_categories}}) {
        if (!*from) continue;
        if (!*into) into->emplace();
        add(**into, **from);
    }
    return r;
}

json to_json(const report& r) {
    json histogram = json::object();
    for (const auto& [k, v] : r.steps_histogram) histogram[std::to_string(k)] = v;
    json j = {{"episodes", r.episodes},
              {"steps", r.steps},
              {"frames", r.frames},
              {"mean_steps", r.mean_steps() ? json(*r.mean_steps()) : json(nullptr)},
              {"mean_steps_exact", r.episodes ? json{{"num", r.steps}, {"den", r.episodes}} : json(nullptr)},
              {"platforms", r.platforms},
              {"software", r.software},
              {"websites", r.websites},
              {"steps_histogram", std::move(histogram)},
              {"action_types", {{"desktop", r.desktop_actions}, {"mobile", r.mobile_actions}}},
              {"environments", r.environments},
              {"environment_count", r.environments.size()},
              {"notes", {"environments are distinct software and website names after case folding"}}};
    if (r.software_categories) j["software_categories"] = *r.software_categories;
    if (r.website_categories) j["website_categories"] = *r.website_categories;
    return j;
}

report report_from_json(const json& j) {
    report r;
    try {
        r.episodes = j.at("episodes").get<std::uint64_t>();
        r.steps = j.at("steps").get<std::uint64_t>();
        r.frames = j.at("frames").get<std::uint64_t>();
        for (const auto& [k, v] : j.at("steps_histogram").items()) r.steps_histogram[std::stoull(k)] = v.get<std::uint64_t>();
        r.desktop_actions = counts_from(j.at("action_types"), "desktop");
        r.mobile_actions = counts_from(j.at("action_types"), "mobile");
        r.environments = j.at("environments").get<std::set<std::string>>();
    } catch (const json::exception& e) {
        throw error(errc::json_schema_error, std::string("stats report: ") + e.what());
    }
    r.platforms = counts_from(j, "platforms");
    r.software = counts_from(j, "software");
    r.websites = counts_from(j, "websites");
    if (j.contains("software_categories")) r.software_categories = counts_from(j, "software_categories");
    if (j.contains("website_categories")) r.website_categories = counts_from(j, "website_categories");
    return r;
}

std::string render_report(const report& r, format f) {
    if (f == format::json) return to_json(r).dump(2) + "\n";
    std::string out;
    char buf[256];
    auto row = [&](const std::string& name, const std::string& value, std::size_t width) {
        out += name + std::string(width - name.size(), ' ') + "  " +
               std::string(value.size() < 10 ? 10 - value.size() : 0, ' ') + value + "\n";
    };
    auto table = [&](const std::string& title, const counts& c) {
        std::size_t width = title.size();
        for (const auto& [k, _] : c) width = std::max(width, k.size());
        row(title, "count", width);
        for (const auto& [k, v] : ranked(c)) row(k, std::to_string(v), width);
        out += "\n";
    };
    std::snprintf(buf, sizeof buf, "episodes %llu\nsteps %llu\nframes %llu\n",
                  static_cast<unsigned long long>(r.episodes), static_cast<unsigned long long>(r.steps),
                  static_cast<unsigned long long>(r.frames));
    out += buf;
    if (auto m = r.mean_steps()) {
        std::snprintf(buf, sizeof buf, "mean steps %.4f\n", *m);
    } else {
        std::snprintf(buf, sizeof buf, "mean steps n/a\n");
    }
    out += buf;
    out += "environments " + std::to_string(r.environments.size()) + "\n\n";
    table("platform", r.platforms);
    table("software", r.software);
    table("website", r.websites);
    counts histogram;
    for (const auto& [k, v] : r.steps_histogram) histogram[std::to_string(k)] = v;
    table("steps", histogram);
    table("desktop action", r.desktop_actions);
    table("mobile action", r.mobile_actions);
    if (r.software_categories) table("software category", *r.software_categories);
    if (r.website_categories) table("website category", *r.website_categories);
    return out;
}

}  // namespace guitraj::stats
