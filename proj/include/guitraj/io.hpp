#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace guitraj {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const fs::path& path);

// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const fs::path& path, std::string_view contents);

std::vector<std::string> read_lines(const fs::path& path);

// One compact JSON value per line, trailing newline after each.
std::string to_jsonl(const std::vector<json>& rows);

// Integral values serialize as JSON integers so "450" never becomes "450.0".
json number_json(double value);

// Filesystem-safe item name: kept as-is when it is plain ASCII [A-Za-z0-9._-],
// otherwise "x" + hex of the bytes.
std::string safe_name(std::string_view id);

// Extracts a double from a JSON number or a numeric string.
bool json_to_double(const json& value, double& out);

}  // namespace guitraj
