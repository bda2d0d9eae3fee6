#include "guitraj/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <variant>

#include "guitraj/error.hpp"

namespace guitraj {
namespace {

using value = std::variant<std::string, double, bool>;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw error(errc::config_error, (path.empty() ? "" : path + ": ") + msg, path);
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

bool bare_name(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    }
    return true;
}

// Returns the value and the unparsed tail (which may only hold a comment).
std::pair<value, std::string_view> read_value(std::string_view s, const std::string& where) {
    if (s.empty()) fail(where, "missing value");
    if (s[0] == '"') {
        std::string out;
        std::size_t i = 1;
        for (; i < s.size() && s[i] != '"'; ++i) {
            if (s[i] != '\\') {
                out.push_back(s[i]);
                continue;
            }
            if (++i == s.size()) break;
            switch (s[i]) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                default: fail(where, std::string("unknown escape \\") + s[i]);
            }
        }
        if (i >= s.size()) fail(where, "unterminated string");
        return {out, s.substr(i + 1)};
    }
    const auto end = s.find_first_of(" \t#");
    const std::string token(s.substr(0, end));
    const std::string_view rest = end == std::string_view::npos ? std::string_view{} : s.substr(end);
    if (token == "true") return {true, rest};
    if (token == "false") return {false, rest};
    char* stop = nullptr;
    errno = 0;
    const double d = std::strtod(token.c_str(), &stop);
    if (token.empty() || *stop != '\0' || errno == ERANGE || !std::isfinite(d)) {
        fail(where, "expected a quoted string, number or boolean, got '" + token + "'");
    }
    return {d, rest};
}

struct binder {
    std::function<void(const value&, const std::string&)> set;
};

template <typename T>
binder bind(T& target, const fs::path& base) {
    return {[&target, base](const value& v, const std::string& where) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!std::holds_alternative<bool>(v)) fail(where, "expected true or false");
            target = std::get<bool>(v);
        } else if constexpr (std::is_same_v<T, double>) {
            if (!std::holds_alternative<double>(v)) fail(where, "expected a number");
            target = std::get<double>(v);
        } else if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, int>) {
            if (!std::holds_alternative<double>(v)) fail(where, "expected an integer");
            const double d = std::get<double>(v);
            if (d != std::floor(d) || std::fabs(d) > 9.0e15) fail(where, "expected an integer");
            target = static_cast<T>(d);
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!std::holds_alternative<std::string>(v)) fail(where, "expected a quoted string");
            target = std::get<std::string>(v);
        } else {
            if (!std::holds_alternative<std::string>(v)) fail(where, "expected a quoted path");
            const fs::path p = std::get<std::string>(v);
            target = p.empty() || p.is_absolute() || base.empty() ? p : base / p;
        }
    }};
}

std::map<std::string, binder> bindings(pipeline_config& c, const fs::path& base) {
    return {
        {"paths.work_dir", bind(c.paths.work_dir, base)},
        {"paths.metadata", bind(c.paths.metadata, base)},
        {"paths.frames_dir", bind(c.paths.frames_dir, base)},
        {"paths.fixture_dir", bind(c.paths.fixture_dir, base)},
        {"paths.category_map", bind(c.paths.category_map, base)},
        {"filter.mode", bind(c.filter.mode, base)},
        {"filter.threshold", bind(c.filter.threshold, base)},
        {"filter.training_data", bind(c.filter.training_data, base)},
        {"filter.checkpoint", bind(c.filter.checkpoint, base)},
        {"filter.epochs", bind(c.filter.epochs, base)},
        {"filter.learning_rate", bind(c.filter.learning_rate, base)},
        {"filter.batch_size", bind(c.filter.batch_size, base)},
        {"filter.feature_dims", bind(c.filter.feature_dims, base)},
        {"filter.upsample", bind(c.filter.upsample, base)},
        {"score.quality_threshold", bind(c.score.quality_threshold, base)},
        {"score.max_duration", bind(c.score.max_duration, base)},
        {"score.clip_seconds", bind(c.score.clip_seconds, base)},
        {"extract.window", bind(c.extract.window, base)},
        {"extract.strict_parse", bind(c.extract.strict_parse, base)},
        {"ground.frame_offset", bind(c.ground.frame_offset, base)},
        {"ground.extract_command", bind(c.ground.extract_command, base)},
        {"ground.synthesize_frames", bind(c.ground.synthesize_frames, base)},
        {"ground.frame_width", bind(c.ground.frame_width, base)},
        {"ground.frame_height", bind(c.ground.frame_height, base)},
        {"ground.audit_samples", bind(c.ground.audit_samples, base)},
        {"assemble.grounding", bind(c.assemble.grounding, base)},
        {"assemble.action_prediction", bind(c.assemble.action_prediction, base)},
        {"assemble.trajectory_modeling", bind(c.assemble.trajectory_modeling, base)},
        {"assemble.grounding_bbox_weight", bind(c.assemble.grounding_bbox_weight, base)},
        {"assemble.action_thought_weight", bind(c.assemble.action_thought_weight, base)},
        {"assemble.trajectory_thought_weight", bind(c.assemble.trajectory_thought_weight, base)},
        {"assemble.shard_size", bind(c.assemble.shard_size, base)},
        {"backend.kind", bind(c.backend.kind, base)},
        {"backend.endpoint", bind(c.backend.endpoint, base)},
        {"backend.token_env", bind(c.backend.token_env, base)},
        {"backend.max_attempts", bind(c.backend.max_attempts, base)},
        {"backend.base_backoff", bind(c.backend.base_backoff, base)},
        {"backend.rate_limit", bind(c.backend.rate_limit, base)},
        {"backend.connect_timeout", bind(c.backend.connect_timeout, base)},
        {"backend.read_timeout", bind(c.backend.read_timeout, base)},
        {"backend.cache", bind(c.backend.cache, base)},
        {"backend.cache_dir", bind(c.backend.cache_dir, base)},
        {"run.seed", bind(c.run.seed, base)},
        {"run.concurrency", bind(c.run.concurrency, base)},
    };
}

}  // namespace

fs::path pipeline_config::frames_root() const {
    return paths.frames_dir.empty() ? paths.work_dir / "frames" : paths.frames_dir;
}

fs::path pipeline_config::cache_root() const {
    return backend.cache_dir.empty() ? paths.work_dir / "cache" : backend.cache_dir;
}

pipeline_config parse_config(std::string_view text, const fs::path& base_dir) {
    pipeline_config c;
    c.paths.work_dir = base_dir.empty() ? fs::path("work") : base_dir / "work";
    auto table = bindings(c, base_dir);
    std::set<std::string> sections;
    for (const auto& [key, _] : table) sections.insert(key.substr(0, key.find('.')));
    std::set<std::string> seen;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        const std::string at = "line " + std::to_string(line_no);
        if (line.empty() || line[0] == '#') continue;
        if (line[0] == '[') {
            const auto close = line.find(']');
            if (close == std::string_view::npos) fail(at, "unterminated section header");
            const auto tail = trim(line.substr(close + 1));
            if (!tail.empty() && tail[0] != '#') fail(at, "unexpected text after section header");
            section = std::string(trim(line.substr(1, close - 1)));
            if (!sections.count(section)) fail(section, "unknown section");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(at, "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        if (!bare_name(key)) fail(at, "bad key '" + key + "'");
        if (section.empty()) fail(key, "key outside any section");
        const std::string field = section + "." + key;
        auto it = table.find(field);
        if (it == table.end()) fail(field, "unknown key");
        if (!seen.insert(field).second) fail(field, "duplicate key");
        auto [v, rest] = read_value(trim(line.substr(eq + 1)), field);
        rest = trim(rest);
        if (!rest.empty() && rest[0] != '#') fail(field, "unexpected text after value");
        it->second.set(v, field);
    }
    validate_config(c);
    return c;
}

pipeline_config load_config(const fs::path& file) {
    std::error_code ec;
    if (!fs::is_regular_file(file, ec)) fail("", "config file '" + file.string() + "' not found");
    std::string text;
    try {
        text = read_file(file);
    } catch (const std::exception& e) {
        fail("", std::string("cannot read config: ") + e.what());
    }
    return parse_config(text, file.parent_path().empty() ? fs::path(".") : file.parent_path());
}

void validate_config(const pipeline_config& c) {
    auto require = [](bool ok, const char* field, const char* msg) {
        if (!ok) fail(field, msg);
    };
    require(c.filter.mode == "local" || c.filter.mode == "backend", "filter.mode", "must be \"local\" or \"backend\"");
    require(c.filter.threshold >= 0 && c.filter.threshold <= 1, "filter.threshold", "must lie in [0,1]");
    require(c.filter.epochs >= 1, "filter.epochs", "must be at least 1");
    require(c.filter.learning_rate > 0, "filter.learning_rate", "must be positive");
    require(c.filter.batch_size >= 1, "filter.batch_size", "must be at least 1");
    require(c.filter.feature_dims >= 1 && c.filter.feature_dims <= (1LL << 30), "filter.feature_dims",
            "must lie in [1, 2^30]");
    require(c.score.max_duration > 0, "score.max_duration", "must be positive");
    require(c.score.clip_seconds > 0, "score.clip_seconds", "must be positive");
    require(c.extract.window > 0, "extract.window", "must be positive");
    require(c.ground.frame_offset >= 0, "ground.frame_offset", "must be non-negative");
    require(c.ground.frame_width >= 1 && c.ground.frame_height >= 1, "ground.frame_width", "frame size must be positive");
    require(c.ground.audit_samples >= 0, "ground.audit_samples", "must be non-negative");
    require(c.assemble.grounding || c.assemble.action_prediction || c.assemble.trajectory_modeling, "assemble.grounding",
            "at least one export task must be enabled");
    for (auto [w, name] : {std::pair{c.assemble.grounding_bbox_weight, "assemble.grounding_bbox_weight"},
                           std::pair{c.assemble.action_thought_weight, "assemble.action_thought_weight"},
                           std::pair{c.assemble.trajectory_thought_weight, "assemble.trajectory_thought_weight"}}) {
        require(w >= 0 && w <= 1, name, "must lie in [0,1]");
    }
    require(c.assemble.shard_size >= 1, "assemble.shard_size", "must be at least 1");
    require(c.backend.kind == "mock" || c.backend.kind == "http", "backend.kind", "must be \"mock\" or \"http\"");
    require(c.backend.kind != "http" || !c.backend.endpoint.empty(), "backend.endpoint", "required for the http backend");
    require(c.backend.max_attempts >= 1, "backend.max_attempts", "must be at least 1");
    require(c.backend.base_backoff >= 0, "backend.base_backoff", "must be non-negative");
    require(c.backend.rate_limit >= 0, "backend.rate_limit", "must be non-negative");
    require(c.run.seed >= 0, "run.seed", "must be non-negative");
    require(c.run.concurrency >= 1, "run.concurrency", "must be at least 1");
}

}  // namespace guitraj
