#include "guitraj/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "guitraj/error.hpp"

namespace guitraj {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error(errc::io_error, "cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out.flush()) throw error(errc::io_error, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw error(errc::io_error, "rename to " + path.string() + " failed: " + ec.message());
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_error, "cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

std::string to_jsonl(const std::vector<json>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.dump();
        out += '\n';
    }
    return out;
}

json number_json(double value) {
    if (std::isfinite(value) && std::floor(value) == value && std::fabs(value) < 9.0e15) {
        return static_cast<std::int64_t>(value);
    }
    return value;
}

std::string safe_name(std::string_view id) {
    bool plain = !id.empty() && id != "." && id != "..";
    for (unsigned char c : id) {
        if (!(std::isalnum(c) || c == '.' || c == '_' || c == '-')) {
            plain = false;
            break;
        }
    }
    if (plain) return std::string(id);
    static constexpr char digits[] = "0123456789abcdef";
    std::string out = "x";
    for (unsigned char c : id) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

bool json_to_double(const json& value, double& out) {
    if (value.is_number()) {
        out = value.get<double>();
        return std::isfinite(out);
    }
    if (value.is_string()) {
        const auto& s = value.get_ref<const std::string&>();
        std::size_t b = s.find_first_not_of(" \t");
        std::size_t e = s.find_last_not_of(" \t");
        if (b == std::string::npos) return false;
        std::string trimmed = s.substr(b, e - b + 1);
        char* end = nullptr;
        out = std::strtod(trimmed.c_str(), &end);
        return end == trimmed.c_str() + trimmed.size() && std::isfinite(out);
    }
    return false;
}

}  // namespace guitraj
