#include <doctest.h>

#include "guitraj/assembler.hpp"
#include "guitraj/hash.hpp"
#include "guitraj/rng.hpp"
#include "helpers.hpp"

using namespace guitraj;
using namespace guitraj::assembler;
using testutil::action;
using testutil::code_of;

namespace {

grounded_action step(const user_action& base, bool spatial, int i) {
    grounded_action g;
    g.base = base;
    g.frame = frame_ref{"v", base.at.seconds, "v/" + std::to_string(i) + ".png", 1000, 1000};
    if (spatial) {
        for (const auto& name : spatial_param_names(platform::windows, base.action_type)) {
            resolved_param r;
            r.rel = rel_point{100 + i, 200 + i};
            r.rel_box = rel_bbox{90 + i, 190 + i, 110 + i, 210 + i};
            r.pixel = pixel_point{200 + i, 100 + i};
            g.resolved[name] = r;
        }
    }
    return g;
}

grounded_episode episode(int id, const std::vector<std::string>& types, bool complete) {
    grounded_episode e;
    e.video_id = "v";
    e.task_id = id;
    e.instruction = "goal " + std::to_string(id);
    e.software = "Excel";
    e.os = platform::windows;
    for (std::size_t i = 0; i < types.size(); ++i) {
        const auto& t = types[i];
        param_map p;
        if (t == "write") p["text"] = std::string("hello");
        if (t == "finish") p["status"] = std::string("success");
        if (t == "click") p["bbox"] = box4{1, 2, 3, 4};
        auto a = action(t, p, static_cast<double>(i), "target " + std::to_string(i));
        a.action_reason = "reason " + std::to_string(i);
        const bool spatial = !spatial_param_names(platform::windows, t).empty();
        e.steps.push_back(step(a, spatial, static_cast<int>(i)));
    }
    e.complete = complete;
    return e;
}

std::vector<grounded_episode> corpus() {
    return {episode(0, {"click", "write", "dragTo", "finish"}, true), episode(1, {"click", "click", "hotkey"}, false),
            episode(2, {"write", "finish"}, true)};
}

std::size_t spatial_steps(const std::vector<grounded_episode>& eps) {
    std::size_t n = 0;
    for (const auto& e : eps)
        for (const auto& s : e.steps) n += !s.resolved.empty();
    return n;
}

const message_part& target_of(const training_sample& s) { return s.messages.back().parts.back(); }

}  // namespace

TEST_CASE("count laws") {
    const auto eps = corpus();
    export_config cfg;
    CHECK(export_grounding_samples(eps, cfg).size() == spatial_steps(eps));
    CHECK(export_action_prediction_samples(eps, cfg).size() == 9);
    CHECK(export_trajectory_samples(eps, cfg).size() == 2);
    CHECK(export_all(eps, cfg).size() == 4 + 9 + 2);
    CHECK(export_grounding_samples({episode(5, {"write", "finish"}, true)}, cfg).empty());
    cfg.grounding = false;
    CHECK(export_all(eps, cfg).size() == 9 + 2);
    cfg.action_prediction = cfg.trajectory_modeling = false;
    CHECK(code_of([&] { export_all(eps, cfg); }) == errc::invalid_argument);
}

TEST_CASE("loss-mask law") {
    for (const auto& s : export_all(corpus(), export_config{})) {
        int unmasked_text = 0;
        for (const auto& m : s.messages) {
            for (const auto& p : m.parts) {
                if (p.kind == message_part::type::image) CHECK(p.loss_masked);
                if (p.kind == message_part::type::text && !p.loss_masked) {
                    ++unmasked_text;
                    CHECK(m.role == "assistant");
                }
            }
        }
        CHECK(unmasked_text >= 1);
    }
}

TEST_CASE("trajectory samples alternate frames and actions") {
    const auto eps = corpus();
    const auto t = export_trajectory_samples(eps, export_config{});
    REQUIRE(t.size() == 2);
    int images = 0, actions = 0;
    for (const auto& m : t[0].messages) {
        for (const auto& p : m.parts) {
            images += p.kind == message_part::type::image;
            actions += p.kind == message_part::type::text && !p.loss_masked;
        }
    }
    CHECK(images == 4);
    CHECK(actions == 4);
}

TEST_CASE("grounding templates") {
    const auto eps = corpus();
    export_config point;
    point.grounding_bbox_weight = 0;
    for (const auto& s : export_grounding_samples(eps, point)) {
        const auto target = json::parse(target_of(s).content);
        for (const auto& item : target) CHECK(item.contains("point"));
        CHECK(s.messages[0].parts[0].kind == message_part::type::image);
    }
    export_config bbox;
    bbox.grounding_bbox_weight = 1;
    const auto samples = export_grounding_samples(eps, bbox);
    for (const auto& s : samples) {
        const auto target = json::parse(target_of(s).content);
        for (const auto& item : target) CHECK(item.contains("bbox_2d"));
    }
    CHECK(json::parse(target_of(samples[0]).content)[0]["bbox_2d"] == json{90, 190, 110, 210});
}

TEST_CASE("action prediction history and Thought variant") {
    const std::vector<grounded_episode> eps = {episode(0, {"click", "write", "dragTo", "finish"}, true)};
    export_config plain;
    plain.action_thought_weight = 0;
    const auto s = export_action_prediction_samples(eps, plain);
    REQUIRE(s.size() == 4);
    const std::string h1 = s[0].messages[0].parts[1].content, h3 = s[2].messages[0].parts[1].content;
    const std::string a1 = "1. " + action_target(eps[0].steps[0]).dump();
    const std::string a2 = "2. " + action_target(eps[0].steps[1]).dump();
    const std::string a3 = "3. " + action_target(eps[0].steps[2]).dump();
    CHECK(h1.find("1. {") == std::string::npos);
    REQUIRE(h3.find(a1) != std::string::npos);
    REQUIRE(h3.find(a2) != std::string::npos);
    CHECK(h3.find(a1) < h3.find(a2));
    CHECK(h3.find(a3) == std::string::npos);
    CHECK(json::parse(target_of(s[0]).content) == json::array({action_target(eps[0].steps[0])}));

    export_config thought;
    thought.action_thought_weight = 1;
    for (const auto& t : export_action_prediction_samples(eps, thought)) {
        const std::string text = target_of(t).content;
        CHECK(text.rfind("Thought:", 0) == 0);
        CHECK(text.find("\nAction:") != std::string::npos);
    }
}

TEST_CASE("action targets") {
    const auto e = episode(0, {"click", "write"}, false);
    const auto click = action_target(e.steps[0]);
    CHECK(click["action"] == "click");
    CHECK(click["point"] == json{100, 200});
    CHECK_FALSE(click.contains("bbox"));
    const auto write = action_target(e.steps[1]);
    CHECK(write == json{{"action", "write"}, {"text", "hello"}});
}

TEST_CASE("sharding") {
    const auto dir = testutil::scratch("shards");
    std::vector<training_sample> samples;
    for (int i = 0; i < 10; ++i) {
        training_sample s;
        s.kind = i < 6 ? task_kind::grounding : task_kind::trajectory_modeling;
        s.messages.push_back({"assistant", {{message_part::type::text, "sample " + std::to_string(i), false}}});
        samples.push_back(s);
    }
    const auto m = write_shards(samples, 4, dir / "a", 3);
    REQUIRE(m.shards.size() == 3);
    CHECK(m.shards[0].samples == 4);
    CHECK(m.shards[1].samples == 4);
    CHECK(m.shards[2].samples == 2);
    CHECK(m.total == 10);
    CHECK(m.counts.at("grounding") == 6);
    CHECK(m.counts.at("action_prediction") == 0);
    CHECK(m.counts.at("trajectory_modeling") == 4);
    for (const auto& sh : m.shards) {
        const std::string bytes = read_file(dir / "a" / sh.file);
        CHECK(bytes.size() == sh.bytes);
        CHECK(sh.checksum == hex64(fnv1a64(bytes)));
    }
    CHECK(shard_manifest_from_json(json::parse(read_file(dir / "a" / "manifest.json"))) == m);
    CHECK(write_shards(samples, 4, dir / "b", 3) == m);
    CHECK(read_file(dir / "a" / "shard-00000.jsonl") == read_file(dir / "b" / "shard-00000.jsonl"));

    const auto small = write_shards(std::vector<training_sample>(samples.begin(), samples.begin() + 3), 4, dir / "a", 3);
    CHECK(small.shards.size() == 1);
    CHECK_FALSE(fs::exists(dir / "a" / "shard-00001.jsonl"));

    const auto empty = write_shards({}, 4, dir / "e", 3);
    CHECK(empty.total == 0);
    CHECK(empty.shards.empty());
    CHECK(empty.counts.size() == 3);
    CHECK(fs::exists(dir / "e" / "manifest.json"));
    fs::remove_all(dir);
}

TEST_CASE("export is deterministic and images resolve") {
    const auto eps = corpus();
    export_config cfg;
    cfg.seed = 4;
    CHECK(export_all(eps, cfg) == export_all(eps, cfg));
    const auto dir = testutil::scratch("images");
    const auto samples = export_all(eps, cfg);
    CHECK_FALSE(missing_images(samples, dir).empty());
    for (const auto& e : eps)
        for (const auto& s : e.steps) {
            fs::create_directories((dir / s.frame.path).parent_path());
            write_file_atomic(dir / s.frame.path, "x");
        }
    CHECK(missing_images(samples, dir).empty());
    fs::remove_all(dir);
}

TEST_CASE("export config validation") {
    export_config c;
    c.validate();
    c.grounding_bbox_weight = 1.5;
    CHECK(code_of([&] { c.validate(); }) == errc::invalid_argument);
    c.grounding_bbox_weight = 0.5;
    c.shard_size = 0;
    CHECK(code_of([&] { c.validate(); }) == errc::invalid_argument);
}
