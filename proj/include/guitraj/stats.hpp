#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "guitraj/core/types.hpp"

namespace guitraj::stats {

using counts = std::map<std::string, std::uint64_t>;

// name -> category, keys case-folded.
using category_map = std::map<std::string, std::string>;

// Two-column UTF-8 TSV: name<TAB>category. Blank lines and lines starting
// with '#' are skipped. INVALID_ARGUMENT on lines without a tab.
category_map load_category_map(const fs::path& path);

struct report {
    std::uint64_t episodes = 0;
    std::uint64_t steps = 0;
    std::uint64_t frames = 0;  // image references (one observation per step)
    counts platforms;
    counts software;
    counts websites;  // episodes without a website count under "none"
    std::map<std::uint64_t, std::uint64_t> steps_histogram;
    counts desktop_actions;
    counts mobile_actions;
    std::set<std::string> environments;  // software and websites, case-folded
    std::optional<counts> software_categories;
    std::optional<counts> website_categories;

    // steps / episodes; empty for an empty report.
    std::optional<double> mean_steps() const;
    friend bool operator==(const report&, const report&) = default;
};

report compute_stats(const std::vector<grounded_episode>& episodes, const category_map* categories = nullptr);

// Associative, commutative; identity is the default report.
report merge(const report& a, const report& b);

std::string fold_case(std::string_view s);

json to_json(const report& r);
report report_from_json(const json& j);

enum class format { json, text };
std::string render_report(const report& r, format f);

}  // namespace guitraj::stats
