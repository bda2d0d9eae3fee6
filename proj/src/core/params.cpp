#include "guitraj/core/params.hpp"

#include <cmath>

namespace guitraj {
namespace {

// "[1, 2]" style strings are accepted wherever an array is expected.
json unwrap_string_array(const json& raw) {
    if (raw.is_string()) {
        auto parsed = json::parse(raw.get_ref<const std::string&>(), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_array()) return parsed;
    }
    return raw;
}

bool numbers(const json& arr, std::size_t n, double* out) {
    if (!arr.is_array() || arr.size() != n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!arr[i].is_number()) return false;
        out[i] = arr[i].get<double>();
        if (!std::isfinite(out[i])) return false;
    }
    return true;
}

bool decode_paths(const json& raw, pointer_paths& out) {
    const json arr = unwrap_string_array(raw);
    if (!arr.is_array()) return false;
    out.clear();
    for (const auto& item : arr) {
        if (!item.is_object() || !item.contains("path")) return false;
        pointer_path p;
        if (item.contains("id")) {
            if (!item["id"].is_number_integer()) return false;
            p.id = item["id"].get<int>();
        }
        const json path = unwrap_string_array(item["path"]);
        if (!path.is_array()) return false;
        for (const auto& pt : path) {
            double v[2];
            if (!numbers(pt, 2, v)) return false;
            p.path.push_back({v[0], v[1]});
        }
        out.push_back(std::move(p));
    }
    return true;
}

}  // namespace

std::string_view kind_name(param_kind kind) noexcept {
    switch (kind) {
        case param_kind::point: return "point";
        case param_kind::bbox: return "bbox";
        case param_kind::scalar: return "scalar";
        case param_kind::text: return "text";
        case param_kind::enumeration: return "enum";
        case param_kind::key_list: return "key-list";
        case param_kind::pointer_paths: return "pointer-paths";
    }
    return "?";
}

bool holds_kind(const param_value& value, param_kind kind) noexcept {
    switch (kind) {
        case param_kind::point: return std::holds_alternative<point2>(value);
        case param_kind::bbox: return std::holds_alternative<box4>(value);
        case param_kind::scalar: return std::holds_alternative<double>(value);
        case param_kind::text:
        case param_kind::enumeration: return std::holds_alternative<std::string>(value);
        case param_kind::key_list: return std::holds_alternative<string_list>(value);
        case param_kind::pointer_paths: return std::holds_alternative<pointer_paths>(value);
    }
    return false;
}

json to_json(const param_value& value) {
    struct visitor {
        json operator()(const point2& p) const { return json::array({number_json(p.y), number_json(p.x)}); }
        json operator()(const box4& b) const {
            return json::array({number_json(b.y1), number_json(b.x1), number_json(b.y2), number_json(b.x2)});
        }
        json operator()(double d) const { return number_json(d); }
        json operator()(const std::string& s) const { return s; }
        json operator()(const string_list& l) const { return json(l); }
        json operator()(const pointer_paths& paths) const {
            json arr = json::array();
            for (const auto& p : paths) {
                json path = json::array();
                for (const auto& pt : p.path) path.push_back({number_json(pt.y), number_json(pt.x)});
                arr.push_back({{"id", p.id}, {"path", std::move(path)}});
            }
            return arr;
        }
    };
    return std::visit(visitor{}, value);
}

bool infer_param(const json& raw, param_value& out) {
    if (raw.is_number()) {
        double d = raw.get<double>();
        if (!std::isfinite(d)) return false;
        out = d;
        return true;
    }
    if (raw.is_string()) {
        out = raw.get<std::string>();
        return true;
    }
    if (!raw.is_array()) return false;
    double v[4];
    if (numbers(raw, 2, v)) {
        out = point2{v[0], v[1]};
        return true;
    }
    if (numbers(raw, 4, v)) {
        out = box4{v[0], v[1], v[2], v[3]};
        return true;
    }
    if (!raw.empty() && raw[0].is_object()) {
        pointer_paths paths;
        if (!decode_paths(raw, paths)) return false;
        out = std::move(paths);
        return true;
    }
    string_list keys;
    for (const auto& item : raw) {
        if (!item.is_string()) return false;
        keys.push_back(item.get<std::string>());
    }
    out = std::move(keys);
    return true;
}

bool decode_param(const json& raw, param_kind kind, param_value& out) {
    switch (kind) {
        case param_kind::point: {
            double v[2];
            if (!numbers(unwrap_string_array(raw), 2, v)) return false;
            out = point2{v[0], v[1]};
            return true;
        }
        case param_kind::bbox: {
            double v[4];
            if (!numbers(unwrap_string_array(raw), 4, v)) return false;
            out = box4{v[0], v[1], v[2], v[3]};
            return true;
        }
        case param_kind::scalar: {
            double d;
            if (!json_to_double(raw, d)) return false;
            out = d;
            return true;
        }
        case param_kind::text:
        case param_kind::enumeration:
            if (!raw.is_string()) return false;
            out = raw.get<std::string>();
            return true;
        case param_kind::key_list: {
            string_list keys;
            if (raw.is_string()) {
                const auto& s = raw.get_ref<const std::string&>();
                std::size_t start = 0;
                while (start <= s.size()) {
                    std::size_t plus = s.find('+', start);
                    if (plus == start && plus != std::string::npos && plus + 1 == s.size()) plus = std::string::npos;
                    std::string key = s.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
                    const auto b = key.find_first_not_of(' ');
                    const auto e = key.find_last_not_of(' ');
                    key = b == std::string::npos ? std::string{} : key.substr(b, e - b + 1);
                    if (!key.empty()) keys.push_back(std::move(key));
                    if (plus == std::string::npos) break;
                    start = plus + 1;
                }
                if (keys.empty()) return false;
            } else if (raw.is_array()) {
                for (const auto& item : raw) {
                    if (!item.is_string()) return false;
                    keys.push_back(item.get<std::string>());
                }
            } else {
                return false;
            }
            out = std::move(keys);
            return true;
        }
        case param_kind::pointer_paths: {
            pointer_paths paths;
            if (!decode_paths(raw, paths)) return false;
            out = std::move(paths);
            return true;
        }
    }
    return false;
}

}  // namespace guitraj
