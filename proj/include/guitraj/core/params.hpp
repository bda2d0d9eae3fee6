#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "guitraj/io.hpp"

namespace guitraj {

// [y, x] as emitted by the annotator; pixel or relative depending on stage.
struct point2 {
    double y = 0;
    double x = 0;
    friend bool operator==(const point2&, const point2&) = default;
};

struct box4 {
    double y1 = 0, x1 = 0, y2 = 0, x2 = 0;
    friend bool operator==(const box4&, const box4&) = default;
};

struct pointer_path {
    int id = 0;
    std::vector<point2> path;
    friend bool operator==(const pointer_path&, const pointer_path&) = default;
};

using string_list = std::vector<std::string>;
using pointer_paths = std::vector<pointer_path>;

// Tagged action-parameter value. Alternatives line up with param_kind.
using param_value = std::variant<point2, box4, double, std::string, string_list, pointer_paths>;

using param_map = std::map<std::string, param_value>;

enum class param_kind { point, bbox, scalar, text, enumeration, key_list, pointer_paths };

std::string_view kind_name(param_kind kind) noexcept;

// Does the stored alternative satisfy the kind? (enumeration is text-shaped.)
bool holds_kind(const param_value& value, param_kind kind) noexcept;

json to_json(const param_value& value);

// Shape-inferred decode used when no schema applies: number -> scalar,
// string -> text, [n,n] -> point, [n,n,n,n] -> bbox, [str...] -> key list,
// [{id,path}...] -> pointer paths. Returns false if no shape fits.
bool infer_param(const json& raw, param_value& out);

// Schema-directed decode; tolerates the string encodings the annotation
// prompt shows ("[y, x]", "e.g. 100", "Ctrl+C"). Returns false when the raw
// value cannot be read as the kind.
bool decode_param(const json& raw, param_kind kind, param_value& out);

}  // namespace guitraj
