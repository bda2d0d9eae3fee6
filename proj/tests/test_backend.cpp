#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <thread>

#include "guitraj/backend.hpp"
#include "guitraj/extractor.hpp"
#include "guitraj/grounder.hpp"
#include "guitraj/meta_filter.hpp"
#include "guitraj/video_scorer.hpp"
#include "helpers.hpp"

using namespace guitraj;
using namespace guitraj::backend;
using testutil::code_of;

namespace {

request score_req(const std::string& id = "vid") {
    video_metadata m;
    m.video_id = id;
    m.title = "Excel tutorial: pivot tables";
    m.duration = 300;
    return scorer::build_score_request(m, scorer::select_scoring_clip(300));
}

retry_policy policy(int attempts, double base = 1.0) {
    retry_policy p;
    p.max_attempts = attempts;
    p.base_backoff = base;
    return p;
}

}  // namespace

TEST_CASE("transient failures are retried") {
    int calls = 0;
    function_backend b([&](const request&) -> std::string {
        if (++calls < 3) throw call_failure(call_failure::kind::server, 503, "busy");
        return "ok";
    });
    virtual_clock c;
    call_record rec;
    CHECK(call_with_retry(b, score_req(), policy(3), nullptr, c, &rec) == "ok");
    CHECK(rec.attempts == 3);
    CHECK(calls == 3);
    REQUIRE(rec.delays.size() == 2);
    CHECK(rec.delays[1] >= rec.delays[0]);
    CHECK(c.now() == doctest::Approx(rec.delays[0] + rec.delays[1]));

    calls = 0;
    function_backend dead([&](const request&) -> std::string {
        ++calls;
        throw call_failure(call_failure::kind::transport, 0, "refused");
    });
    CHECK(code_of([&] { call_with_retry(dead, score_req(), policy(4), nullptr, c); }) == errc::backend_exhausted);
    CHECK(calls == 4);
}

TEST_CASE("auth and client errors are not retried") {
    int calls = 0;
    function_backend denied([&](const request&) -> std::string {
        ++calls;
        throw call_failure(call_failure::kind::auth, 401, "bad token");
    });
    virtual_clock c;
    call_record rec;
    CHECK(code_of([&] { call_with_retry(denied, score_req(), policy(5), nullptr, c, &rec); }) == errc::auth_error);
    CHECK(calls == 1);
    CHECK(rec.attempts == 1);
    calls = 0;
    function_backend bad([&](const request&) -> std::string {
        ++calls;
        throw call_failure(call_failure::kind::client, 422, "bad request");
    });
    CHECK(code_of([&] { call_with_retry(bad, score_req(), policy(5), nullptr, c); }) == errc::backend_error);
    CHECK(calls == 1);
}

TEST_CASE("backoff grows and stays within its jitter band") {
    const auto p = policy(10, 0.5);
    double prev = 0;
    for (int k = 1; k <= 8; ++k) {
        const double d = backoff_delay(p, "abc", k);
        CHECK(d >= 0.5 * std::ldexp(1.0, k - 1));
        CHECK(d < 0.75 * std::ldexp(1.0, k - 1));
        CHECK(d >= prev);
        CHECK(d == backoff_delay(p, "abc", k));
        prev = d;
    }
}

TEST_CASE("rate limiter spaces grants on a virtual clock") {
    auto c = std::make_shared<virtual_clock>();
    rate_limiter lim(2.0, c);
    std::vector<double> grants;
    for (int i = 0; i < 4; ++i) grants.push_back(lim.acquire());
    CHECK(grants.back() - grants.front() >= 1.0);
    for (std::size_t i = 1; i < grants.size(); ++i) CHECK(grants[i] - grants[i - 1] == doctest::Approx(0.5));
    CHECK(code_of([&] { rate_limiter(0.0, c); }) == errc::invalid_argument);

    auto shared = std::make_shared<virtual_clock>();
    rate_limiter concurrent(4.0, shared);
    std::vector<double> got(8);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&, i] { got[i] = concurrent.acquire(); });
    for (auto& t : threads) t.join();
    std::sort(got.begin(), got.end());
    for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i] - got[i - 1] == doctest::Approx(0.25));
}

TEST_CASE("request digest and checks") {
    CHECK(digest(score_req()) == digest(score_req()));
    CHECK(digest(score_req()) != digest(score_req("other")));
    CHECK(digest(score_req()).size() == 64);
    CHECK(request_from_json(to_json(score_req())) == score_req());
    request r;
    r.target = stage::extract;
    CHECK(code_of([&] { check_request(r); }) == errc::invalid_argument);
}

TEST_CASE("caching backend answers repeats from disk") {
    const auto dir = testutil::scratch("cache");
    auto inner_calls = std::make_shared<int>(0);
    auto inner = std::make_shared<function_backend>([inner_calls](const request& r) {
        ++*inner_calls;
        return "answer for " + r.attachments.at(0).ref;
    });
    caching_backend cache(inner, dir);
    CHECK(cache.call(score_req("a")) == "answer for a");
    CHECK(cache.call(score_req("a")) == "answer for a");
    CHECK(cache.call(score_req("b")) == "answer for b");
    CHECK(*inner_calls == 2);
    CHECK(cache.hits() == 1);
    caching_backend reopened(inner, dir);
    CHECK(reopened.call(score_req("b")) == "answer for b");
    CHECK(*inner_calls == 2);
    fs::remove_all(dir);
}

TEST_CASE("mock backend is deterministic and its answers parse") {
    mock_backend a({}, 5), b({}, 5);
    video_metadata m;
    m.video_id = "tut";
    m.title = "How to make a pivot table in Excel tutorial";
    m.duration = 500;
    const auto classify = meta::build_classify_request(m);
    CHECK(a.call(classify) == b.call(classify));
    CHECK(meta::parse_classify_response(a.call(classify)) > 0.5);

    const auto score = scorer::build_score_request(m, scorer::select_scoring_clip(m.duration));
    CHECK(a.call(score) == b.call(score));
    CHECK(scorer::passes_quality_gate(scorer::parse_score_response(a.call(score)).score));

    std::vector<task_annotation> prior;
    for (const auto& seg : extractor::segment_video("tut", m.duration)) {
        const auto req = extractor::build_extraction_request({"tut", prior, seg});
        const std::string text = a.call(req);
        CHECK(text == b.call(req));
        const auto parsed = extractor::parse_annotation_response(text);
        for (const auto& t : parsed.tasks) {
            for (const auto& act : t.user_actions) {
                CHECK(act.at.seconds >= seg.start);
                CHECK(act.at.seconds <= seg.end);
            }
        }
        prior = extractor::merge_segments(prior, parsed.tasks);
        for (const auto& rep : extractor::validate_trajectory(prior, m.duration)) CHECK(rep.retained());
    }
    CHECK_FALSE(prior.empty());

    const frame_ref frame{"tut", 9.5, "tut/9500.png", 1280, 720};
    auto act = testutil::action("dragTo", {}, 10);
    const auto ground = grounder::build_grounding_request(act, frame, {"start_point", "end_point"});
    CHECK(a.call(ground) == b.call(ground));
    grounder::parse_grounding_response(a.call(ground), {"start_point", "end_point"});
}

TEST_CASE("mock backend fixtures and scripts") {
    const auto dir = testutil::scratch("mock");
    const auto req = score_req("scripted_vid");
    fs::create_directories(dir / "score");
    write_file_atomic(dir / "score" / (digest(req) + ".txt"), "verbatim fixture text");
    write_file_atomic(dir / "mock_script.json", R"({
        "score": {"flaky_vid": ["@error:503", "@error:401"], "denied_vid": "@error:403"},
        "classify": {"c1": "@error:0"}
    })");
    mock_backend m(dir, 1);
    CHECK(m.call(req) == "verbatim fixture text");
    try {
        m.call(score_req("flaky_vid"));
        FAIL("expected a failure");
    } catch (const call_failure& f) {
        CHECK(f.type() == call_failure::kind::server);
        CHECK(f.status() == 503);
    }
    try {
        m.call(score_req("flaky_vid"));
        FAIL("expected a failure");
    } catch (const call_failure& f) {
        CHECK(f.type() == call_failure::kind::auth);
    }
    try {
        m.call(score_req("denied_vid"));
        FAIL("expected a failure");
    } catch (const call_failure& f) {
        CHECK(f.type() == call_failure::kind::auth);
    }
    fs::remove_all(dir);
}

TEST_CASE("http backend against a local server") {
    httplib::Server server;
    std::atomic<int> score_calls{0};
    std::string seen_auth;
    server.Post("/v1/score", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        if (++score_calls < 3) {
            res.status = 500;
            res.set_content("try later", "text/plain");
            return;
        }
        const auto body = json::parse(req.body);
        res.set_content(json{{"text", "scored " + body["attachments"][0]["ref"].get<std::string>()}}.dump(),
                        "application/json");
    });
    server.Post("/v1/classify", [](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    http_config cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.auth_token = "secret";
    cfg.read_timeout = 5;
    auto http = std::make_shared<http_backend>(cfg);
    client cl(http, policy(3, 0.001));
    call_record rec;
    CHECK(cl.call(score_req("abc"), &rec) == "scored abc");
    CHECK(rec.attempts == 3);
    CHECK(seen_auth == "Bearer secret");

    video_metadata m;
    m.video_id = "x";
    call_record rec2;
    CHECK(code_of([&] { cl.call(meta::build_classify_request(m), &rec2); }) == errc::auth_error);
    CHECK(rec2.attempts == 1);

    server.stop();
    worker.join();

    http_config closed = cfg;
    closed.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    closed.connect_timeout = 0.2;
    client dead(std::make_shared<http_backend>(closed), policy(2, 0.001));
    CHECK(code_of([&] { dead.call(score_req()); }) == errc::backend_exhausted);
}
