#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "guitraj/backend.hpp"

namespace guitraj::backend {

http_backend::http_backend(http_config config) : config_(std::move(config)) {
    const auto& ep = config_.endpoint;
    const auto scheme_end = ep.find("://");
    if (scheme_end == std::string::npos) throw error(errc::config_error, "endpoint needs a scheme: " + ep, "backend.endpoint");
    const auto path_start = ep.find('/', scheme_end + 3);
    scheme_host_ = ep.substr(0, path_start);
    base_path_ = path_start == std::string::npos ? "" : ep.substr(path_start);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

std::string http_backend::call(const request& r) {
    httplib::Client cli(scheme_host_);
    const auto to_us = [](double s) { return std::chrono::microseconds(static_cast<long long>(s * 1e6)); };
    cli.set_connection_timeout(to_us(config_.connect_timeout));
    cli.set_read_timeout(to_us(config_.read_timeout));
    httplib::Headers headers;
    if (!config_.auth_token.empty()) headers.emplace("Authorization", "Bearer " + config_.auth_token);
    const std::string path = base_path_ + "/" + std::string(stage_name(r.target));
    auto res = cli.Post(path, headers, to_json(r).dump(), "application/json");
    if (!res) throw call_failure(call_failure::kind::transport, 0, httplib::to_string(res.error()));
    const int status = res->status;
    if (status == 401 || status == 403) throw call_failure(call_failure::kind::auth, status, res->body);
    if (status >= 500) throw call_failure(call_failure::kind::server, status, res->body);
    if (status >= 400) throw call_failure(call_failure::kind::client, status, res->body);
    auto body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("text") || !body["text"].is_string()) {
        throw call_failure(call_failure::kind::client, status, "response body lacks a \"text\" string");
    }
    return body["text"].get<std::string>();
}

}  // namespace guitraj::backend
