#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "guitraj/error.hpp"
#include "guitraj/io.hpp"

namespace guitraj::backend {

enum class stage { classify, score, extract, ground };

std::string_view stage_name(stage s) noexcept;
std::optional<stage> parse_stage(std::string_view name);

struct attachment {
    enum class kind { none, clip, frame } type = kind::none;
    std::string ref;  // video id for clips, image path for frames
    std::optional<double> start;
    std::optional<double> end;
    friend bool operator==(const attachment&, const attachment&) = default;
};

struct request {
    stage target = stage::classify;
    std::string prompt;
    std::vector<attachment> attachments;
    std::optional<std::string> context;
    friend bool operator==(const request&, const request&) = default;
};

json to_json(const request& r);
request request_from_json(const json& j);

// Extract requests carry exactly one clip, ground requests exactly one frame.
// Throws INVALID_ARGUMENT.
void check_request(const request& r);

// Stable digest of the canonical request encoding (lowercase SHA-256 hex).
std::string digest(const request& r);

// Transport-level failure reported by a backend implementation.
class call_failure : public std::runtime_error {
public:
    enum class kind { transport, server, auth, client };
    call_failure(kind k, int status, const std::string& msg) : std::runtime_error(msg), kind_(k), status_(status) {}
    kind type() const noexcept { return kind_; }
    int status() const noexcept { return status_; }
    bool retryable() const noexcept { return kind_ == kind::transport || kind_ == kind::server; }

private:
    kind kind_;
    int status_;
};

// One attempt. Implementations throw call_failure; anything else is a bug.
class backend {
public:
    virtual ~backend() = default;
    virtual std::string call(const request& r) = 0;
};

// Time source for backoff and rate limiting, swappable for a virtual clock.
class clock {
public:
    virtual ~clock() = default;
    virtual double now() = 0;  // seconds
    virtual void sleep_until(double t) = 0;
};

class steady_clock final : public clock {
public:
    double now() override;
    void sleep_until(double t) override;

private:
    std::chrono::steady_clock::time_point origin_ = std::chrono::steady_clock::now();
};

// Advances instantly; records the latest time anyone waited for.
class virtual_clock final : public clock {
public:
    double now() override;
    void sleep_until(double t) override;

private:
    std::mutex mutex_;
    double now_ = 0;
};

// Token bucket with a burst of one: grants are spaced 1/rate apart.
class rate_limiter {
public:
    explicit rate_limiter(double requests_per_second, std::shared_ptr<clock> c);
    // Blocks until the caller may proceed; returns the granted time.
    double acquire();
    double rate() const noexcept { return rate_; }

private:
    double rate_;
    std::shared_ptr<clock> clock_;
    std::mutex mutex_;
    double next_free_ = 0;
};

struct retry_policy {
    int max_attempts = 3;
    double base_backoff = 1.0;  // seconds before the second attempt
    std::uint64_t jitter_seed = 0;
    double rate_limit = 0;      // requests/second; 0 = unlimited
};

struct call_record {
    int attempts = 0;
    std::vector<double> delays;  // backoff slept before attempts 2..n
};

// Backoff before attempt k+1 (k >= 1): base * 2^(k-1) * (1 + jitter), jitter in [0, 0.5).
double backoff_delay(const retry_policy& policy, std::string_view request_digest, int attempt);

// Retries transport errors and 5xx with exponential backoff; 401/403 fail
// immediately with AUTH_ERROR; other 4xx with BACKEND_ERROR. Exhaustion
// raises BACKEND_EXHAUSTED.
std::string call_with_retry(backend& b, const request& r, const retry_policy& policy, rate_limiter* limiter,
                            clock& c, call_record* record = nullptr);

// Decorator: response cache on disk keyed by request digest.
class caching_backend final : public backend {
public:
    caching_backend(std::shared_ptr<backend> inner, fs::path cache_dir);
    std::string call(const request& r) override;
    std::size_t hits() const noexcept { return hits_; }

private:
    std::shared_ptr<backend> inner_;
    fs::path dir_;
    std::atomic<std::size_t> hits_{0};
};

struct http_config {
    std::string endpoint;  // e.g. http://127.0.0.1:8080/v1
    std::string auth_token;
    double connect_timeout = 10;
    double read_timeout = 300;
};

// POST {endpoint}/{stage} with the request JSON; expects {"text": ...}.
class http_backend final : public backend {
public:
    explicit http_backend(http_config config);
    std::string call(const request& r) override;

private:
    http_config config_;
    std::string scheme_host_;
    std::string base_path_;
};

// Deterministic stand-in for a remote annotator.
class mock_backend final : public backend {
public:
    // fixture_dir may be empty. Recognized layout:
    //   <fixture_dir>/<stage>/<digest>.txt   exact response for a request
    //   <fixture_dir>/mock_script.json       scripted answers keyed by attachment ref
    mock_backend(fs::path fixture_dir, std::uint64_t seed);
    std::string call(const request& r) override;
    std::size_t calls() const noexcept { return calls_; }

private:
    std::string synthesize(const request& r) const;
    std::optional<std::string> scripted(const request& r);

    fs::path fixture_dir_;
    std::uint64_t seed_;
    json script_ = json::object();
    std::mutex mutex_;
    std::map<std::string, std::size_t> script_cursor_;
    std::atomic<std::size_t> calls_{0};
};

// Wraps a callable; handy for scripted behaviour in tests.
class function_backend final : public backend {
public:
    explicit function_backend(std::function<std::string(const request&)> fn) : fn_(std::move(fn)) {}
    std::string call(const request& r) override { return fn_(r); }

private:
    std::function<std::string(const request&)> fn_;
};

// Convenience bundle used by stages: backend + policy + limiter + clock.
class client {
public:
    client(std::shared_ptr<backend> b, retry_policy policy, std::shared_ptr<clock> c = std::make_shared<steady_clock>());
    std::string call(const request& r, call_record* record = nullptr);

private:
    std::shared_ptr<backend> backend_;
    retry_policy policy_;
    std::shared_ptr<clock> clock_;
    std::unique_ptr<rate_limiter> limiter_;
};

}  // namespace guitraj::backend
