#include "guitraj/backend.hpp"

#include <cmath>
#include <thread>

#include "guitraj/hash.hpp"
#include "guitraj/rng.hpp"

namespace guitraj::backend {

std::string_view stage_name(stage s) noexcept {
    switch (s) {
        case stage::classify: return "classify";
        case stage::score: return "score";
        case stage::extract: return "extract";
        case stage::ground: return "ground";
    }
    return "?";
}

std::optional<stage> parse_stage(std::string_view name) {
    for (auto s : {stage::classify, stage::score, stage::extract, stage::ground}) {
        if (stage_name(s) == name) return s;
    }
    return std::nullopt;
}

json to_json(const request& r) {
    json atts = json::array();
    for (const auto& a : r.attachments) {
        json item = {{"kind", a.type == attachment::kind::clip    ? "clip"
                              : a.type == attachment::kind::frame ? "frame"
                                                                  : "none"},
                     {"ref", a.ref}};
        if (a.start || a.end) {
            item["time_range"] = {a.start ? number_json(*a.start) : json(nullptr),
                                  a.end ? number_json(*a.end) : json(nullptr)};
        }
        atts.push_back(std::move(item));
    }
    return {{"stage", stage_name(r.target)},
            {"prompt", r.prompt},
            {"attachments", std::move(atts)},
            {"context", r.context ? json(*r.context) : json(nullptr)}};
}

request request_from_json(const json& j) {
    try {
        request r;
        auto s = parse_stage(j.at("stage").get<std::string>());
        if (!s) throw error(errc::parse_error, "unknown stage");
        r.target = *s;
        r.prompt = j.at("prompt").get<std::string>();
        for (const auto& a : j.at("attachments")) {
            attachment att;
            const auto kind = a.at("kind").get<std::string>();
            att.type = kind == "clip" ? attachment::kind::clip : kind == "frame" ? attachment::kind::frame : attachment::kind::none;
            att.ref = a.at("ref").get<std::string>();
            if (auto tr = a.find("time_range"); tr != a.end() && tr->is_array() && tr->size() == 2) {
                if (!(*tr)[0].is_null()) att.start = (*tr)[0].get<double>();
                if (!(*tr)[1].is_null()) att.end = (*tr)[1].get<double>();
            }
            r.attachments.push_back(std::move(att));
        }
        if (auto c = j.find("context"); c != j.end() && c->is_string()) r.context = c->get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw error(errc::parse_error, std::string("backend request: ") + e.what());
    }
}

void check_request(const request& r) {
    auto count = [&](attachment::kind k) {
        std::size_t n = 0;
        for (const auto& a : r.attachments) n += a.type == k;
        return n;
    };
    if (r.target == stage::extract && (count(attachment::kind::clip) != 1 || r.attachments.size() != 1)) {
        throw error(errc::invalid_argument, "extract requests carry exactly one clip");
    }
    if (r.target == stage::ground && (count(attachment::kind::frame) != 1 || r.attachments.size() != 1)) {
        throw error(errc::invalid_argument, "ground requests carry exactly one frame");
    }
}

std::string digest(const request& r) { return sha256_hex(to_json(r).dump()); }

double steady_clock::now() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
}

void steady_clock::sleep_until(double t) {
    const double wait = t - now();
    if (wait > 0) std::this_thread::sleep_for(std::chrono::duration<double>(wait));
}

double virtual_clock::now() {
    std::lock_guard lock(mutex_);
    return now_;
}

void virtual_clock::sleep_until(double t) {
    std::lock_guard lock(mutex_);
    now_ = std::max(now_, t);
}

rate_limiter::rate_limiter(double requests_per_second, std::shared_ptr<clock> c)
    : rate_(requests_per_second), clock_(std::move(c)) {
    if (!(rate_ > 0)) throw error(errc::invalid_argument, "rate limit must be positive");
}

double rate_limiter::acquire() {
    double grant;
    {
        std::lock_guard lock(mutex_);
        grant = std::max(clock_->now(), next_free_);
        next_free_ = grant + 1.0 / rate_;
    }
    clock_->sleep_until(grant);
    return grant;
}

double backoff_delay(const retry_policy& policy, std::string_view request_digest, int attempt) {
    rng gen(derive_seed(policy.jitter_seed, std::string(request_digest) + "#" + std::to_string(attempt)));
    const double jitter = 0.5 * gen.unit();
    return policy.base_backoff * std::ldexp(1.0, attempt - 1) * (1.0 + jitter);
}

std::string call_with_retry(backend& b, const request& r, const retry_policy& policy, rate_limiter* limiter,
                            clock& c, call_record* record) {
    if (policy.max_attempts < 1) throw error(errc::invalid_argument, "max_attempts must be >= 1");
    const std::string key = digest(r);
    std::string last_error;
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        if (attempt > 1) {
            const double delay = backoff_delay(policy, key, attempt - 1);
            if (record) record->delays.push_back(delay);
            c.sleep_until(c.now() + delay);
        }
        if (limiter) limiter->acquire();
        if (record) record->attempts = attempt;
        try {
            return b.call(r);
        } catch (const call_failure& f) {
            switch (f.type()) {
                case call_failure::kind::auth:
                    throw error(errc::auth_error, "status " + std::to_string(f.status()) + ": " + f.what());
                case call_failure::kind::client:
                    throw error(errc::backend_error, "status " + std::to_string(f.status()) + ": " + f.what());
                default:
                    last_error = f.what();
            }
        }
    }
    throw error(errc::backend_exhausted,
                std::to_string(policy.max_attempts) + " attempts failed; last error: " + last_error);
}

caching_backend::caching_backend(std::shared_ptr<backend> inner, fs::path cache_dir)
    : inner_(std::move(inner)), dir_(std::move(cache_dir)) {
    fs::create_directories(dir_);
}

std::string caching_backend::call(const request& r) {
    const fs::path entry = dir_ / (digest(r) + ".json");
    std::error_code ec;
    if (fs::exists(entry, ec)) {
        auto cached = json::parse(read_file(entry), nullptr, false);
        if (!cached.is_discarded() && cached.contains("text") && cached["text"].is_string()) {
            ++hits_;
            return cached["text"].get<std::string>();
        }
    }
    std::string text = inner_->call(r);
    write_file_atomic(entry, json{{"stage", stage_name(r.target)}, {"text", text}}.dump() + "\n");
    return text;
}

client::client(std::shared_ptr<backend> b, retry_policy policy, std::shared_ptr<clock> c)
    : backend_(std::move(b)), policy_(policy), clock_(std::move(c)) {
    if (policy_.rate_limit > 0) limiter_ = std::make_unique<rate_limiter>(policy_.rate_limit, clock_);
}

std::string client::call(const request& r, call_record* record) {
    check_request(r);
    return call_with_retry(*backend_, r, policy_, limiter_.get(), *clock_, record);
}

}  // namespace guitraj::backend
