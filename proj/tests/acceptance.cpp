#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "guitraj/assembler.hpp"
#include "guitraj/config.hpp"
#include "guitraj/extractor.hpp"
#include "guitraj/grounder.hpp"
#include "guitraj/meta_filter.hpp"
#include "guitraj/pipeline.hpp"
#include "guitraj/rng.hpp"
#include "guitraj/stats.hpp"
#include "guitraj/video_scorer.hpp"
#include "oracles.hpp"

using namespace guitraj;

namespace {

const fs::path fixtures = GUITRAJ_FIXTURES;

struct outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("guitraj_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Reference cross-entropy with long-double accumulation.
double ce_reference(const std::vector<double>& p, const std::vector<int>& y) {
    long double sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const long double q = std::clamp<long double>(p[i], 1e-12L, 1.0L - 1e-12L);
        sum += y[i] ? std::log(q) : std::log1p(-q);
    }
    return static_cast<double>(-sum / p.size());
}

outcome loss_oracles() {
    outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    o.require(std::fabs(meta::ce_loss(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}) - 0.6931471805599453) <= 1e-9,
              "ce ln 2 case");
    o.require(std::fabs(meta::ce_loss(std::vector<double>{0.9, 0.2}, std::vector<int>{1, 0}) - 0.164252033486018) <= 1e-9,
              "ce hand case");
    const std::vector<quality_score> five = {{5, 5, 5}}, four = {{4, 4, 4}};
    o.require(std::fabs(scorer::mse_loss(four, five) - 3.0) <= 1e-9, "mse 3.0 case");
    const std::vector<quality_score> g2 = {{3, 3, 3}, {2, 2, 2}}, p2 = {{3.5, 2.5, 3.5}, {1.5, 2.5, 2.5}};
    o.require(std::fabs(scorer::mse_loss(p2, g2) - 0.75) <= 1e-9, "mse 0.75 case");

    rng gen(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + gen.below(6);
        std::vector<double> p(n);
        std::vector<int> y(n);
        std::vector<quality_score> a(n), b(n);
        long double mse = 0;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = gen.unit();
            y[i] = static_cast<int>(gen.below(2));
            a[i] = {1 + 4 * gen.unit(), 1 + 4 * gen.unit(), 1 + 4 * gen.unit()};
            b[i] = {1 + 4 * gen.unit(), 1 + 4 * gen.unit(), 1 + 4 * gen.unit()};
            for (auto [u, v] : {std::pair{a[i].topic_relevance, b[i].topic_relevance},
                                std::pair{a[i].instruction_clarity, b[i].instruction_clarity},
                                std::pair{a[i].recording_quality, b[i].recording_quality}}) {
                mse += (long double)(u - v) * (u - v);
            }
        }
        o.require(std::fabs(meta::ce_loss(p, y) - ce_reference(p, y)) <= 1e-9, "ce random instance");
        o.require(std::fabs(scorer::mse_loss(a, b) - static_cast<double>(mse / n)) <= 1e-9, "mse random instance");
    }

    for (int trial = 0; trial < 20; ++trial) {
        const std::uint32_t dims = 6;
        meta::linear_classifier model;
        for (std::uint32_t d = 0; d < dims; ++d) model.weights.push_back(2 * gen.unit() - 1);
        model.bias = gen.unit() - 0.5;
        std::vector<meta::example> batch(4);
        for (auto& ex : batch) {
            ex.x.dims = dims;
            for (std::uint32_t d = 0; d < dims; ++d)
                if (gen.below(2)) ex.x.entries.push_back({d, 0.2 + gen.unit()});
            ex.label = static_cast<int>(gen.below(2));
        }
        std::vector<double> gw;
        double gb = 0;
        meta::logistic_gradient(model, batch, gw, gb);
        const double h = 1e-5;
        for (std::uint32_t d = 0; d <= dims; ++d) {
            auto plus = model, minus = model;
            (d < dims ? plus.weights[d] : plus.bias) += h;
            (d < dims ? minus.weights[d] : minus.bias) -= h;
            const double numeric = (meta::logistic_loss(plus, batch) - meta::logistic_loss(minus, batch)) / (2 * h);
            const double analytic = d < dims ? gw[d] : gb;
            o.require(std::fabs(analytic - numeric) <= 1e-6 * std::max(1.0, std::fabs(numeric)), "gradient check");
        }
    }
    const double elapsed = seconds_since(t0);
    o.require(elapsed < 1.0, "runtime " + std::to_string(elapsed) + " s");
    if (o.pass) o.detail = "50 random instances, 20 gradient checks, " + std::to_string(elapsed) + " s";
    return o;
}

outcome gate_fidelity() {
    outcome o;
    rng gen(7);
    int boundary = 0;
    for (int i = 0; i < 1000; ++i) {
        // Tenths around the threshold so exact 4.2 values occur often.
        auto draw = [&] { return (gen.below(4) == 0 ? 42 : 10 + static_cast<int>(gen.below(41))) / 10.0; };
        const quality_score s{draw(), draw(), draw()};
        const bool expect = s.topic_relevance >= 4.2 && s.instruction_clarity >= 4.2 && s.recording_quality >= 4.2;
        boundary += s.topic_relevance == 4.2 || s.instruction_clarity == 4.2 || s.recording_quality == 4.2;
        o.require(scorer::passes_quality_gate(s) == expect, "quality gate case " + std::to_string(i));

        video_metadata m;
        m.duration = i % 10 == 0 ? 720.0 : (i % 10 == 1 ? std::nextafter(720.0, 0.0) : 1440 * gen.unit());
        o.require(scorer::duration_gate(m) == (m.duration < 720.0), "duration gate at " + std::to_string(m.duration));
    }
    o.require(scorer::passes_quality_gate({4.2, 4.2, 4.2}), "4.2 inclusive");
    o.require(!scorer::passes_quality_gate({4.5, 4.1, 5.0}), "4.1 excluded");
    if (o.pass) o.detail = "1000 cases, " + std::to_string(boundary) + " touching 4.2, 100 at exactly 720 s";
    return o;
}

outcome segmentation_laws() {
    outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    rng gen(11);
    for (int i = 0; i < 10000; ++i) {
        const double d = 720.0 * (1.0 - gen.unit());
        const auto segs = extractor::segment_video("v", d);
        o.require(segs.size() == static_cast<std::size_t>(std::ceil(d / 240.0)), "segment count");
        o.require(segs.front().start == 0 && segs.back().end == d, "tiling ends");
        for (std::size_t k = 0; k < segs.size(); ++k) {
            o.require(segs[k].end - segs[k].start <= 240.0 && segs[k].end > segs[k].start, "segment length");
            if (k) o.require(segs[k].start == segs[k - 1].end, "contiguity");
        }
    }
    const double elapsed = seconds_since(t0);
    o.require(elapsed < 1.0, "runtime " + std::to_string(elapsed) + " s");
    if (o.pass) o.detail = "10000 durations in " + std::to_string(elapsed) + " s";
    return o;
}

outcome parser_conformance() {
    outcome o;
    const fs::path dir = fixtures / "extraction";
    const json expected = json::parse(read_file(dir / "expected.json"));
    o.require(expected.size() >= 10, "fewer than 10 fixtures");
    int parsed = 0, errors = 0;
    for (const auto& [name, want] : expected.items()) {
        extractor::parse_options opts;
        opts.strict = want.value("strict", false);
        try {
            const auto r = extractor::parse_annotation_response(read_file(dir / name), opts);
            if (want.contains("error")) {
                o.require(false, name + " parsed but should fail");
                continue;
            }
            bool counts = r.shots.size() == want["shots"].get<std::size_t>() && r.tasks.size() == want["actions"].size();
            for (std::size_t i = 0; counts && i < r.tasks.size(); ++i)
                counts = r.tasks[i].user_actions.size() == want["actions"][i].get<std::size_t>();
            o.require(counts, name + " counts");
            const auto again = extractor::parse_annotation_response(extractor::render_annotation_response(r.shots, r.tasks));
            o.require(again.shots == r.shots && again.tasks == r.tasks, name + " round trip");
            ++parsed;
        } catch (const error& e) {
            o.require(want.contains("error") && code_name(e.code()) == want["error"].get<std::string>(),
                      name + " raised " + std::string(code_name(e.code())));
            ++errors;
        }
    }
    if (o.pass) o.detail = std::to_string(parsed) + " parsed, " + std::to_string(errors) + " expected errors";
    return o;
}

outcome grounding_selection() {
    outcome o;
    const auto times = grounder::plan_frame_times(10, 600);
    std::vector<frame_ref> frames;
    for (double t : times) frames.push_back({"v", t, "v/" + std::to_string(t), 1920, 1080});
    for (int mask = 0; mask < 8; ++mask) {
        const bool pattern[3] = {bool(mask & 1), bool(mask & 2), bool(mask & 4)};
        int calls = 0;
        auto b = std::make_shared<backend::function_backend>([&](const backend::request& r) -> std::string {
            ++calls;
            const double t = *r.attachments.at(0).start;
            const auto idx = std::find(times.begin(), times.end(), t) - times.begin();
            if (!pattern[idx]) return R"({"feasible": false, "reason": "not visible"})";
            return R"({"feasible": true, "predictions": [{"point_name": "point", "center_point": "<point>450 320</point>", "bounding_box": "<bbox>400 300 500 340</bbox>"}]})";
        });
        backend::retry_policy p;
        p.max_attempts = 1;
        backend::client client(b, p, std::make_shared<backend::virtual_clock>());
        user_action click;
        click.action_type = "click";
        click.at = timestamp{10};
        click.grounding_instruction = "OK button";
        const auto g = grounder::ground_action(click, platform::windows, frames, client);
        int first = -1;
        for (int i = 0; i < 3 && first < 0; ++i)
            if (pattern[i]) first = i;
        const std::string tag = "pattern " + std::to_string(mask);
        if (first < 0) {
            o.require(!g.grounded && calls == 3, tag + " should discard after 3 calls");
        } else {
            o.require(g.grounded && g.grounded->frame == frames[first], tag + " selected frame");
            o.require(calls == first + 1, tag + " call count " + std::to_string(calls));
        }
    }
    if (o.pass) o.detail = "8 patterns";
    return o;
}

outcome coordinate_conversion() {
    outcome o;
    for (int w : {1, 640, 1920, 3840}) {
        pixel_point prev{-1, -1};
        for (int v = 0; v <= 1000; ++v) {
            const auto p = grounder::rel_to_pixel(rel_point{v, v}, w, w);
            o.require(p.x >= 0 && p.x <= w - 1 && p.y >= 0 && p.y <= w - 1, "out of bounds");
            o.require(p.x >= prev.x && p.y >= prev.y, "not monotone");
            prev = p;
        }
    }
    for (int y = 0; y <= 1000; y += 7)
        for (int x = 0; x <= 1000; x += 7) {
            const auto p = grounder::rel_to_pixel(rel_point{y, x}, 1000, 1000);
            o.require(p.x == std::min(x, 999) && p.y == std::min(y, 999), "identity at 1000x1000");
        }
    o.require(grounder::rel_to_pixel(rel_point{500, 500}, 1000, 1000) == pixel_point{500, 500}, "(500,500)");
    if (o.pass) o.detail = "widths 1, 640, 1920, 3840";
    return o;
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), root);
        if (*rel.begin() == "logs") continue;
        out[rel.generic_string()] = read_file(entry.path());
    }
    return out;
}

fs::path copy_e2e(const std::string& name) {
    const auto dir = scratch(name);
    for (const auto& entry : fs::directory_iterator(fixtures / "e2e")) fs::copy(entry.path(), dir / entry.path().filename());
    return dir;
}

struct e2e_state {
    bool ran = false;
    pipeline_config config;
    std::vector<pipeline::stage_result> results;
    double seconds = 0;
};

e2e_state& e2e_run() {
    static e2e_state state;
    if (!state.ran) {
        state.ran = true;
        const auto dir = copy_e2e("full");
        state.config = load_config(dir / "pipeline.conf");
        const auto t0 = std::chrono::steady_clock::now();
        pipeline::runner r(state.config);
        state.results = r.run_all();
        state.seconds = seconds_since(t0);
    }
    return state;
}

outcome export_laws() {
    outcome o;
    auto& run = e2e_run();
    o.require(run.results.size() == 6 && run.results.back().ok(), "run-all did not complete");
    if (!o.pass) return o;
    pipeline::runner r(run.config);
    std::vector<grounded_episode> episodes;
    for (const auto& line : read_lines(r.stage_dir(pipeline::stage_id::ground) / "episodes.jsonl"))
        if (!line.empty()) episodes.push_back(grounded_episode_from_json(json::parse(line)));
    std::size_t spatial = 0, steps = 0, complete = 0;
    for (const auto& e : episodes) {
        complete += e.complete;
        steps += e.steps.size();
        for (const auto& s : e.steps) spatial += !s.resolved.empty();
    }
    const fs::path out = r.stage_dir(pipeline::stage_id::assemble);
    std::size_t unmasked_images = 0;
    std::map<std::string, std::size_t> counts;
    for (const char* kind : {"grounding", "action_prediction", "trajectory_modeling"}) {
        const auto m = assembler::shard_manifest_from_json(json::parse(read_file(out / kind / "manifest.json")));
        counts[kind] = m.total;
        for (const auto& shard : m.shards) {
            for (const auto& line : read_lines(out / kind / shard.file)) {
                if (line.empty()) continue;
                const auto s = training_sample_from_json(json::parse(line));
                bool has_text_target = false;
                for (const auto& msg : s.messages)
                    for (const auto& p : msg.parts) {
                        if (p.kind == message_part::type::image) {
                            unmasked_images += !p.loss_masked;
                            o.require(fs::exists(run.config.frames_root() / p.content), "missing image " + p.content);
                        }
                        has_text_target = has_text_target || (p.kind == message_part::type::text && !p.loss_masked);
                    }
                o.require(has_text_target, std::string(kind) + " sample without an unmasked text part");
            }
        }
    }
    o.require(counts["grounding"] == spatial, "grounding count " + std::to_string(counts["grounding"]) + " vs " + std::to_string(spatial));
    o.require(counts["action_prediction"] == steps, "action count");
    o.require(counts["trajectory_modeling"] == complete, "trajectory count");
    o.require(unmasked_images == 0, "unmasked image parts");
    if (o.pass)
        o.detail = std::to_string(counts["grounding"]) + " grounding, " + std::to_string(counts["action_prediction"]) +
                   " action, " + std::to_string(counts["trajectory_modeling"]) + " trajectory samples";
    return o;
}

outcome end_to_end() {
    outcome o;
    auto& full = e2e_run();
    o.require(full.results.size() == 6 && full.results.back().ok(), "uninterrupted run failed");
    o.require(full.seconds < 60, "runtime " + std::to_string(full.seconds) + " s");
    if (!o.pass) return o;
    for (const char* kind : {"grounding", "action_prediction", "trajectory_modeling"}) {
        const auto m = json::parse(read_file(full.config.paths.work_dir / "assemble" / kind / "manifest.json"));
        o.require(m["total"].get<std::size_t>() > 0, std::string(kind) + " stream empty");
    }

    const auto dir = copy_e2e("resumed");
    const auto config = load_config(dir / "pipeline.conf");
    int invocations = 0;
    bool done = false;
    while (!done && invocations < 200) {
        pipeline::run_options opts;
        opts.resume = true;
        opts.stop_after = 2;
        pipeline::runner r(config, opts);
        const auto results = r.run_all();
        ++invocations;
        done = results.size() == 6 && results.back().ok();
    }
    o.require(done, "resumed run never completed");
    const auto a = tree_bytes(full.config.paths.work_dir), b = tree_bytes(config.paths.work_dir);
    o.require(a.size() == b.size(), "file sets differ");
    for (const auto& [path, bytes] : a) {
        auto it = b.find(path);
        o.require(it != b.end() && it->second == bytes, "differs: " + path);
    }
    if (o.pass)
        o.detail = std::to_string(a.size()) + " files identical after " + std::to_string(invocations) +
                   " interrupted invocations; full run " + std::to_string(full.seconds) + " s";
    return o;
}

outcome stats_oracle() {
    outcome o;
    rng gen(31);
    for (int i = 0; i < 100; ++i) {
        const auto corpus = oracle::random_corpus(gen);
        o.require(stats::compute_stats(corpus) == oracle::brute_force_stats(corpus), "corpus " + std::to_string(i));
    }
    std::vector<grounded_episode> three(3);
    for (std::size_t i = 0; i < 3; ++i) three[i].steps.resize(i + 2);
    const auto r = stats::compute_stats(three);
    o.require(r.mean_steps() == 3.0 && r.steps == 9, "[2,3,4] mean");
    o.require(!stats::compute_stats({}).mean_steps().has_value(), "empty mean");
    if (o.pass) o.detail = "100 corpora";
    return o;
}

outcome merge_semantics() {
    outcome o;
    const fs::path dir = fixtures / "merge";
    const auto meta = video_metadata_from_json(json::parse(read_lines(dir / "metadata.jsonl").at(0)));
    backend::mock_backend mock(dir, 0);
    const auto segments = extractor::segment_video(meta.video_id, meta.duration);
    o.require(segments.size() == 3, "expected 3 segments");
    std::vector<task_annotation> tasks;
    for (const auto& seg : segments) {
        const auto text = mock.call(extractor::build_extraction_request({meta.video_id, tasks, seg}));
        tasks = extractor::merge_segments(tasks, extractor::parse_annotation_response(text).tasks);
    }
    const auto reports = extractor::validate_trajectory(tasks, meta.duration);
    o.require(tasks.size() == 4, "expected 4 tasks, got " + std::to_string(tasks.size()));
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        o.require(tasks[i].task_id == static_cast<int>(i), "task ids not contiguous");
        o.require(reports[i].retained() && reports[i].complete, "task " + std::to_string(i) + " not clean");
    }
    if (tasks.size() > 1) {
        const auto& spanning = tasks[1];
        o.require(spanning.user_actions.size() == 5, "spanning task has " + std::to_string(spanning.user_actions.size()) + " actions");
        o.require(spanning.user_actions.front().at.seconds < 240 && spanning.user_actions.back().at.seconds >= 240,
                  "spanning task does not cross the boundary");
        o.require(spanning.complete && spanning.user_actions.back().action_type == "finish", "not finish-terminated");
    }
    if (o.pass) o.detail = "task 1 merged across segments 1-2 with 5 actions";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<outcome()>>> criteria = {
        {"loss oracles", loss_oracles},
        {"gate fidelity", gate_fidelity},
        {"segmentation laws", segmentation_laws},
        {"parser conformance", parser_conformance},
        {"grounding selection", grounding_selection},
        {"coordinate conversion", coordinate_conversion},
        {"export count and loss-mask laws", export_laws},
        {"end-to-end determinism and resumability", end_to_end},
        {"stats oracle", stats_oracle},
        {"merge semantics", merge_semantics},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("CRITERION %zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str());
    }
    return failures == 0 ? 0 : 1;
}
