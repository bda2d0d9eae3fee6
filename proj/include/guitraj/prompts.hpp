#pragma once

#include <string>
#include <string_view>
#include <vector>

// Annotation and training prompt templates, kept byte-for-byte as the
// annotator and training recipes expect them.
namespace guitraj::prompts {

extern const std::string_view classify_metadata;
extern const std::string_view score_video;
extern const std::string_view extract_trajectory;
// Placeholders: **[Current Start Time]**, **[Current End Time]**,
// **[Insert Previous Analysis History Here]**, **[Insert Specific Task Prompt Here]**.
extern const std::string_view continue_extraction;
// Placeholders: {grounding_instruction}, {action_type}.
extern const std::string_view ground_action;

// Python str.format-style: "{}" positional slots, "{{" / "}}" literal braces.
extern const std::string_view grounding_v1;
extern const std::string_view grounding_v2;
extern const std::string_view action_prediction_v1;
extern const std::string_view action_prediction_v2;
extern const std::string_view trajectory_v1;
extern const std::string_view trajectory_v2;

// Fills positional "{}" slots in order and unescapes doubled braces.
std::string format_positional(std::string_view tmpl, const std::vector<std::string>& args);

// Replaces every occurrence of `from`.
std::string replace_all(std::string_view text, std::string_view from, std::string_view to);

}  // namespace guitraj::prompts
