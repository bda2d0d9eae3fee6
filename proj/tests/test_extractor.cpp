#include <doctest.h>

#include <cmath>

#include "guitraj/extractor.hpp"
#include "guitraj/rng.hpp"
#include "helpers.hpp"

using namespace guitraj;
using namespace guitraj::extractor;
using testutil::action;
using testutil::code_of;
using testutil::task;

namespace {

const fs::path fixtures = fs::path(GUITRAJ_FIXTURES) / "extraction";

user_action finish_at(double t) { return action("finish", {{"status", std::string("success")}}, t); }
user_action click_at(double t) { return action("click", {{"point", point2{500, 500}}}, t); }

}  // namespace

TEST_CASE("segment_video examples") {
    auto s = segment_video("v", 200);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == segment{"v", 1, 0, 200});
    s = segment_video("v", 600);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == segment{"v", 1, 0, 240});
    CHECK(s[1] == segment{"v", 2, 240, 480});
    CHECK(s[2] == segment{"v", 3, 480, 600});
    CHECK(segment_video("v", 240).size() == 1);
    CHECK(code_of([] { segment_video("v", 0); }) == errc::nonpositive_duration);
}

TEST_CASE("segments tile the video") {
    rng gen(11);
    for (int i = 0; i < 10000; ++i) {
        const double d = 720.0 * (1.0 - gen.unit());
        if (d <= 0) continue;
        const auto segs = segment_video("v", d);
        REQUIRE(segs.size() == static_cast<std::size_t>(std::ceil(d / 240.0)));
        REQUIRE(segs.front().start == 0);
        REQUIRE(segs.back().end == d);
        for (std::size_t k = 0; k < segs.size(); ++k) {
            REQUIRE(segs[k].index == static_cast<int>(k + 1));
            REQUIRE(segs[k].end > segs[k].start);
            REQUIRE(segs[k].end - segs[k].start <= 240.0);
            if (k) REQUIRE(segs[k].start == segs[k - 1].end);
        }
    }
}

TEST_CASE("extraction requests") {
    extraction_context first{"v", {}, segment{"v", 1, 0, 240}};
    const auto r1 = build_extraction_request(first);
    CHECK(r1.target == backend::stage::extract);
    CHECK(r1.prompt.find("Shot Splitting") != std::string::npos);
    CHECK_FALSE(r1.context.has_value());
    REQUIRE(r1.attachments.size() == 1);
    CHECK(r1.attachments[0].start == 0);
    CHECK(r1.attachments[0].end == 240);
    CHECK(build_extraction_request(first) == r1);

    auto t0 = task(0, {click_at(10), finish_at(20)});
    auto t1 = task(1, {click_at(30)});
    t1.instruction = "second task marker";
    t0.instruction = "first task marker";
    extraction_context second{"v", {t0, t1}, segment{"v", 2, 240, 480}};
    const auto r2 = build_extraction_request(second);
    CHECK(r2.prompt.find("04:00") != std::string::npos);
    CHECK(r2.prompt.find("08:00") != std::string::npos);
    const auto a = r2.prompt.find("first task marker"), b = r2.prompt.find("second task marker");
    REQUIRE(a != std::string::npos);
    REQUIRE(b != std::string::npos);
    CHECK(a < b);
    CHECK(r2.context == serialize_history({t0, t1}));

    extraction_context bad{"v", {t0}, segment{"v", 1, 0, 240}};
    CHECK(code_of([&] { build_extraction_request(bad); }) == errc::history_for_first_segment);
}

TEST_CASE("response fixtures parse to expected counts or codes") {
    const json expected = json::parse(read_file(fixtures / "expected.json"));
    CHECK(expected.size() >= 10);
    for (const auto& [name, want] : expected.items()) {
        CAPTURE(name);
        const std::string text = read_file(fixtures / name);
        parse_options opts;
        opts.strict = want.value("strict", false);
        if (want.contains("error")) {
            try {
                parse_annotation_response(text, opts);
                FAIL("expected " << want["error"].get<std::string>());
            } catch (const error& e) {
                CHECK(code_name(e.code()) == want["error"].get<std::string>());
            }
            continue;
        }
        const auto r = parse_annotation_response(text, opts);
        CHECK(r.shots.size() == want["shots"].get<std::size_t>());
        REQUIRE(r.tasks.size() == want["actions"].size());
        for (std::size_t i = 0; i < r.tasks.size(); ++i) CHECK(r.tasks[i].user_actions.size() == want["actions"][i].get<std::size_t>());
        const auto again = parse_annotation_response(render_annotation_response(r.shots, r.tasks));
        CHECK(again.shots == r.shots);
        CHECK(again.tasks == r.tasks);
    }
}

TEST_CASE("timestamp errors name the task and action") {
    try {
        parse_annotation_response(read_file(fixtures / "09_bad_timestamp.txt"));
        FAIL("expected TIMESTAMP_ERROR");
    } catch (const error& e) {
        CHECK(std::string(e.what()).find("task_id 4 action 1") != std::string::npos);
    }
}

TEST_CASE("unknown fields are kept aside") {
    const auto r = parse_annotation_response(read_file(fixtures / "05_unknown_fields.txt"));
    REQUIRE(r.unknown_fields.size() == 1);
    const std::string dumped = r.unknown_fields[0].dump();
    CHECK(dumped.find("difficulty") != std::string::npos);
    CHECK(dumped.find("confidence") != std::string::npos);
}

TEST_CASE("render and parse are inverse on random tasks") {
    rng gen(21);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<task_annotation> tasks;
        double t = 0;
        const int n = static_cast<int>(gen.below(4));
        for (int id = 0; id < n; ++id) {
            std::vector<user_action> acts;
            const int k = 1 + static_cast<int>(gen.below(4));
            for (int j = 0; j < k; ++j) {
                t += gen.below(5);
                acts.push_back(j + 1 == k && gen.below(2) ? finish_at(t) : click_at(t));
            }
            tasks.push_back(task(id, acts, gen.below(2) ? platform::android : platform::windows));
        }
        shot_list shots = {{timestamp{0}, timestamp{t + 1}}};
        const auto r = parse_annotation_response(render_annotation_response(shots, tasks));
        REQUIRE(r.tasks == tasks);
        REQUIRE(r.shots == shots);
    }
}

TEST_CASE("merge_segments") {
    auto t0 = task(0, {click_at(10), finish_at(20)});
    auto t1 = task(1, {click_at(30), click_at(35)});
    auto t2 = task(2, {click_at(200)});
    REQUIRE_FALSE(t2.complete);
    auto cont = task(2, {click_at(250), click_at(260), finish_at(270)});
    auto merged = merge_segments({t0, t1, task(2, {click_at(200)})}, {cont});
    REQUIRE(merged.size() == 3);
    CHECK(merged[2].task_id == 2);
    CHECK(merged[2].user_actions.size() == 4);
    CHECK(merged[2].complete);

    CHECK(merge_segments({}, {t0, t1}) == std::vector<task_annotation>{t0, t1});
    CHECK(merge_segments({t0, t1}, {}) == std::vector<task_annotation>{t0, t1});
    CHECK(code_of([&] { merge_segments({t0}, {task(0, {click_at(30)})}); }) == errc::task_id_conflict);
    CHECK(code_of([&] { merge_segments({t2}, {task(2, {click_at(100)})}); }) == errc::timestamp_regression);
    const auto fresh = merge_segments({t0}, {task(1, {click_at(300)})});
    CHECK(fresh.size() == 2);
    CHECK(code_of([&] { merge_segments({t0}, {task(5, {click_at(300)})}); }) == errc::task_id_conflict);
}

TEST_CASE("validate_trajectory") {
    auto clean = validate_trajectory({task(0, {click_at(10), finish_at(20)})}, 720);
    REQUIRE(clean.size() == 1);
    CHECK(clean[0].retained());
    CHECK(clean[0].complete);

    auto mid = validate_trajectory({task(0, {click_at(10), finish_at(20), click_at(30)})}, 720);
    REQUIRE_FALSE(mid[0].violations.empty());
    CHECK(mid[0].violations[0].code == "FINISH_NOT_LAST");

    auto late = validate_trajectory({task(0, {click_at(780)})}, 720);
    REQUIRE_FALSE(late[0].violations.empty());
    CHECK(late[0].violations[0].code == "OUT_OF_RANGE");

    auto open = validate_trajectory({task(0, {click_at(10)})}, 720);
    CHECK(open[0].retained());
    CHECK_FALSE(open[0].complete);

    auto backwards = validate_trajectory({task(0, {click_at(30), click_at(10)})}, 720);
    CHECK_FALSE(backwards[0].retained());

    auto bad_action = validate_trajectory({task(0, {action("write", {})})}, 720);
    CHECK_FALSE(bad_action[0].retained());
}

TEST_CASE("browser names") {
    CHECK(is_browser("Google Chrome"));
    CHECK(is_browser("firefox"));
    CHECK_FALSE(is_browser("Excel"));
}
