#include "guitraj/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <functional>
#include <map>
#include <mutex>
#include <set>

#include "guitraj/assembler.hpp"
#include "guitraj/error.hpp"
#include "guitraj/extractor.hpp"
#include "guitraj/grounder.hpp"
#include "guitraj/meta_filter.hpp"
#include "guitraj/parallel.hpp"
#include "guitraj/rng.hpp"
#include "guitraj/stats.hpp"
#include "guitraj/video_scorer.hpp"

namespace guitraj::pipeline {
namespace {

struct item {
    std::string id;
    json input;
};

// Errors that say the annotator is unreachable rather than that its answer was bad.
bool infrastructure_error(const error& e) {
    return e.code() == errc::backend_error || e.code() == errc::backend_exhausted || e.code() == errc::auth_error ||
           e.code() == errc::io_error;
}

json error_json(const error& e) { return {{"code", code_name(e.code())}, {"message", e.what()}}; }

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03lldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(ms));
    return buf;
}

class event_log {
public:
    explicit event_log(fs::path file) : file_(std::move(file)) { fs::create_directories(file_.parent_path()); }

    void write(std::string_view stage, std::string_view item_id, std::string_view event, json detail = nullptr) {
        json line = {{"time", utc_now()}, {"stage", stage}, {"item", item_id}, {"event", event}};
        if (!detail.is_null()) line["detail"] = std::move(detail);
        std::lock_guard lock(mutex_);
        std::FILE* f = std::fopen(file_.c_str(), "ab");
        if (!f) return;
        const std::string text = line.dump() + "\n";
        std::fwrite(text.data(), 1, text.size(), f);
        std::fclose(f);
    }

private:
    fs::path file_;
    std::mutex mutex_;
};

std::vector<json> read_jsonl(const fs::path& path) {
    std::vector<json> out;
    for (const auto& line : read_lines(path)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(json::parse(line));
    }
    return out;
}

std::optional<stage_id> upstream_of(stage_id s) {
    switch (s) {
        case stage_id::filter_meta: return std::nullopt;
        case stage_id::score: return stage_id::filter_meta;
        case stage_id::extract: return stage_id::score;
        case stage_id::ground: return stage_id::extract;
        case stage_id::assemble: return stage_id::ground;
        case stage_id::stats: return stage_id::assemble;
    }
    return std::nullopt;
}

}  // namespace

std::string_view stage_name(stage_id s) noexcept {
    switch (s) {
        case stage_id::filter_meta: return "filter-meta";
        case stage_id::score: return "score";
        case stage_id::extract: return "extract";
        case stage_id::ground: return "ground";
        case stage_id::assemble: return "assemble";
        case stage_id::stats: return "stats";
    }
    return "?";
}

std::optional<stage_id> parse_stage_name(std::string_view name) {
    for (stage_id s : all_stages) {
        if (stage_name(s) == name) return s;
    }
    return std::nullopt;
}

json to_json(const stage_result& r) {
    return {{"stage", stage_name(r.stage)}, {"complete", r.complete},   {"interrupted", r.interrupted},
            {"items", r.items},             {"processed", r.processed}, {"skipped", r.skipped},
            {"failed", r.failed},           {"errors", r.errors},       {"counts", r.counts}};
}

int exit_code_for(const error& e) noexcept {
    switch (e.code()) {
        case errc::config_error: return 2;
        case errc::missing_upstream: return 3;
        default: return 1;
    }
}

struct runner::impl {
    const pipeline_config& config;
    const run_options& options;
    std::shared_ptr<backend::backend> backend;
    std::unique_ptr<backend::client> client;
    event_log log;

    impl(const pipeline_config& c, const run_options& o)
        : config(c), options(o), log(c.paths.work_dir / "logs" / "pipeline.jsonl") {}

    fs::path dir(stage_id s) const { return config.paths.work_dir / std::string(stage_name(s)); }
    std::uint64_t seed() const { return static_cast<std::uint64_t>(config.run.seed); }

    backend::client& annotator() {
        if (client) return *client;
        std::shared_ptr<backend::backend> inner = options.backend;
        if (!inner) {
            if (config.backend.kind == "http") {
                backend::http_config http;
                http.endpoint = config.backend.endpoint;
                if (const char* token = std::getenv(config.backend.token_env.c_str())) http.auth_token = token;
                http.connect_timeout = config.backend.connect_timeout;
                http.read_timeout = config.backend.read_timeout;
                inner = std::make_shared<backend::http_backend>(http);
            } else {
                inner = std::make_shared<backend::mock_backend>(config.paths.fixture_dir, seed());
            }
        }
        backend = config.backend.cache ? std::make_shared<backend::caching_backend>(inner, config.cache_root()) : inner;
        backend::retry_policy policy;
        policy.max_attempts = static_cast<int>(config.backend.max_attempts);
        policy.base_backoff = config.backend.base_backoff;
        policy.jitter_seed = seed();
        policy.rate_limit = config.backend.rate_limit;
        auto clock = options.clock ? options.clock : std::make_shared<backend::steady_clock>();
        client = std::make_unique<backend::client>(backend, policy, clock);
        return *client;
    }

    void require_upstream(stage_id s) const {
        auto up = upstream_of(s);
        if (!up) return;
        const fs::path manifest = dir(*up) / "manifest.json";
        std::error_code ec;
        if (!fs::is_regular_file(manifest, ec)) {
            throw error(errc::missing_upstream,
                        std::string(stage_name(s)) + " needs a " + std::string(stage_name(*up)) + " manifest",
                        std::string(stage_name(*up)));
        }
        const json m = json::parse(read_file(manifest));
        if (m.value("status", "") != "complete") {
            throw error(errc::missing_upstream, std::string(stage_name(*up)) + " has not completed",
                        std::string(stage_name(*up)));
        }
    }

    void prepare(stage_id s) const {
        if (!options.resume) fs::remove_all(dir(s));
        fs::create_directories(dir(s) / "items");
    }

    void write_manifest(stage_id s, bool complete, const json& items, const json& counts) const {
        json m = {{"stage", stage_name(s)},
                  {"status", complete ? "complete" : "partial"},
                  {"items", items},
                  {"counts", counts}};
        write_file_atomic(dir(s) / "manifest.json", m.dump(2) + "\n");
    }

    // Runs `fn` over items not yet complete and returns every complete record in input order.
    std::vector<json> process(stage_id s, const std::vector<item>& items, const std::function<json(const item&)>& fn,
                              stage_result& result) {
        const std::string name(stage_name(s));
        const fs::path item_dir = dir(s) / "items";
        result.items = items.size();
        std::vector<std::optional<json>> records(items.size());
        std::vector<std::size_t> pending;
        for (std::size_t i = 0; i < items.size(); ++i) {
            const fs::path f = item_dir / (safe_name(items[i].id) + ".json");
            std::error_code ec;
            if (options.resume && fs::is_regular_file(f, ec)) {
                json rec = json::parse(read_file(f));
                if (rec.value("status", "") == "complete") {
                    records[i] = std::move(rec);
                    ++result.skipped;
                    log.write(name, items[i].id, "skip");
                    continue;
                }
            }
            pending.push_back(i);
        }
        if (options.stop_after && pending.size() > *options.stop_after) {
            pending.resize(*options.stop_after);
            result.interrupted = true;
        }
        std::mutex mutex;
        parallel_for(pending.size(), static_cast<std::size_t>(config.run.concurrency), [&](std::size_t k) {
            const std::size_t i = pending[k];
            const item& it = items[i];
            const fs::path f = item_dir / (safe_name(it.id) + ".json");
            log.write(name, it.id, "start");
            json rec;
            try {
                rec = fn(it);
                rec["id"] = it.id;
                rec["status"] = "complete";
            } catch (const error& e) {
                if (e.code() == errc::auth_error) throw;
                rec = {{"id", it.id}, {"status", "failed"}, {"error", error_json(e)}};
            } catch (const std::exception& e) {
                rec = {{"id", it.id}, {"status", "failed"}, {"error", {{"code", "INTERNAL"}, {"message", e.what()}}}};
            }
            write_file_atomic(f, rec.dump(1) + "\n");
            std::lock_guard lock(mutex);
            ++result.processed;
            if (rec["status"] == "complete") {
                log.write(name, it.id, "complete");
                records[i] = std::move(rec);
            } else {
                ++result.failed;
                result.errors.push_back(it.id + ": " + rec["error"]["message"].get<std::string>());
                log.write(name, it.id, "failed", rec["error"]);
            }
        });
        std::vector<json> done;
        json statuses = json::object();
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (records[i]) {
                statuses[items[i].id] = "complete";
                done.push_back(std::move(*records[i]));
            } else {
                const fs::path f = item_dir / (safe_name(items[i].id) + ".json");
                std::error_code ec;
                statuses[items[i].id] = fs::is_regular_file(f, ec) ? "failed" : "pending";
            }
        }
        result.complete = done.size() == items.size();
        result.counts["items"] = statuses;
        return done;
    }

    void finish(stage_id s, stage_result& result, json counts) {
        json items = result.counts.contains("items") ? result.counts["items"] : json::object();
        result.counts = std::move(counts);
        write_manifest(s, result.complete, items, result.counts);
        log.write(stage_name(s), "", "stage_end", to_json(result));
    }

    // --- stages ---

    meta::decider make_decider() {
        if (config.filter.mode == "backend") return meta::remote_decider(annotator());
        const fs::path model_file = dir(stage_id::filter_meta) / "model.json";
        meta::linear_classifier model;
        std::error_code ec;
        if (!config.filter.checkpoint.empty() && fs::is_regular_file(config.filter.checkpoint, ec)) {
            model = meta::checkpoint_from_json(json::parse(read_file(config.filter.checkpoint)));
        } else if (options.resume && fs::is_regular_file(model_file, ec)) {
            model = meta::checkpoint_from_json(json::parse(read_file(model_file)));
        } else {
            if (config.filter.training_data.empty()) {
                throw error(errc::config_error, "filter.training_data: required for the local classifier",
                            "filter.training_data");
            }
            std::vector<meta::labeled_metadata> data;
            for (const auto& j : read_jsonl(config.filter.training_data)) data.push_back(meta::labeled_metadata_from_json(j));
            if (config.filter.upsample) data = meta::upsample_balance(data, seed());
            meta::train_config tc;
            tc.epochs = config.filter.epochs;
            tc.learning_rate = config.filter.learning_rate;
            tc.batch_size = static_cast<std::size_t>(config.filter.batch_size);
            tc.seed = seed();
            model = meta::train_classifier(data, tc, static_cast<std::uint32_t>(config.filter.feature_dims));
        }
        write_file_atomic(model_file, meta::checkpoint_to_json(model).dump() + "\n");
        auto shared = std::make_shared<meta::linear_classifier>(std::move(model));
        return [shared](const video_metadata& m) {
            return meta::score(*shared, meta::featurize(m, static_cast<std::uint32_t>(shared->weights.size())));
        };
    }

    stage_result filter_meta() {
        stage_result result;
        result.stage = stage_id::filter_meta;
        if (config.paths.metadata.empty()) throw error(errc::config_error, "paths.metadata: required", "paths.metadata");
        std::error_code ec;
        if (!fs::is_regular_file(config.paths.metadata, ec)) {
            throw error(errc::io_error, "metadata file '" + config.paths.metadata.string() + "' not found");
        }
        prepare(stage_id::filter_meta);
        const auto parsed = meta::parse_metadata_lines(read_lines(config.paths.metadata));
        std::vector<item> items;
        std::vector<json> quarantine;
        for (const auto& p : parsed) {
            if (p.meta) {
                items.push_back({p.meta->video_id, guitraj::to_json(*p.meta)});
            } else {
                quarantine.push_back({{"line", p.line_no}, {"error", p.error}, {"raw", p.raw}});
            }
        }
        const auto decide = make_decider();
        const double threshold = config.filter.threshold;
        auto done = process(stage_id::filter_meta, items, [&](const item& it) {
            const double p = decide(video_metadata_from_json(it.input));
            return json{{"probability", p}, {"pass", p >= threshold}, {"metadata", it.input}};
        }, result);
        std::vector<json> passed, decisions;
        for (const auto& r : done) {
            decisions.push_back({{"video_id", r["id"]}, {"probability", r["probability"]}, {"pass", r["pass"]}});
            if (r["pass"].get<bool>()) passed.push_back(r["metadata"]);
        }
        const fs::path d = dir(stage_id::filter_meta);
        write_file_atomic(d / "passed.jsonl", to_jsonl(passed));
        write_file_atomic(d / "decisions.jsonl", to_jsonl(decisions));
        write_file_atomic(d / "quarantine.jsonl", to_jsonl(quarantine));
        finish(stage_id::filter_meta, result,
               {{"read", parsed.size()},
                {"passed", passed.size()},
                {"failed", decisions.size() - passed.size()},
                {"malformed", quarantine.size()}});
        return result;
    }

    stage_result score() {
        stage_result result;
        result.stage = stage_id::score;
        require_upstream(stage_id::score);
        prepare(stage_id::score);
        annotator();
        std::vector<item> items;
        for (auto& j : read_jsonl(dir(stage_id::filter_meta) / "passed.jsonl")) {
            items.push_back({j.at("video_id").get<std::string>(), std::move(j)});
        }
        auto done = process(stage_id::score, items, [&](const item& it) {
            const video_metadata meta = video_metadata_from_json(it.input);
            scorer::scoring_decision d;
            d.video_id = meta.video_id;
            if (!scorer::duration_gate(meta, config.score.max_duration)) {
                d.gated_by = "duration";
            } else {
                try {
                    auto scored = scorer::score_video(
                        meta, scorer::select_scoring_clip(meta.duration, config.score.clip_seconds), annotator());
                    d.score = scored.score;
                    d.reasoning = scored.summary;
                    d.passed = scorer::passes_quality_gate(scored.score, config.score.quality_threshold);
                } catch (const error& e) {
                    if (infrastructure_error(e)) throw;
                    d.gated_by = std::string(code_name(e.code()));
                }
            }
            return json{{"decision", scorer::to_json(d)}, {"metadata", it.input}};
        }, result);
        std::vector<json> passed, decisions;
        std::size_t by_duration = 0, unparsable = 0, scored = 0;
        for (const auto& r : done) {
            const json& d = r["decision"];
            decisions.push_back(d);
            if (d["passed"].get<bool>()) passed.push_back(r["metadata"]);
            if (d.contains("gated_by")) {
                (d["gated_by"] == "duration" ? by_duration : unparsable)++;
            } else {
                ++scored;
            }
        }
        const fs::path dd = dir(stage_id::score);
        write_file_atomic(dd / "passed.jsonl", to_jsonl(passed));
        write_file_atomic(dd / "decisions.jsonl", to_jsonl(decisions));
        finish(stage_id::score, result,
               {{"input", items.size()},
                {"scored", scored},
                {"passed", passed.size()},
                {"below_threshold", scored - passed.size()},
                {"gated_duration", by_duration},
                {"unparsable", unparsable}});
        return result;
    }

    stage_result extract() {
        stage_result result;
        result.stage = stage_id::extract;
        require_upstream(stage_id::extract);
        prepare(stage_id::extract);
        annotator();
        std::vector<item> items;
        for (auto& j : read_jsonl(dir(stage_id::score) / "passed.jsonl")) {
            items.push_back({j.at("video_id").get<std::string>(), std::move(j)});
        }
        extractor::parse_options parse_opts{config.extract.strict_parse};
        auto done = process(stage_id::extract, items, [&](const item& it) {
            const video_metadata meta = video_metadata_from_json(it.input);
            const auto segments = extractor::segment_video(meta.video_id, meta.duration, config.extract.window);
            std::vector<task_annotation> tasks;
            json unknown = json::array(), raw = json::array();
            json rec = {{"video_id", meta.video_id}, {"duration", number_json(meta.duration)},
                        {"segments", segments.size()}, {"error", nullptr}};
            for (const auto& seg : segments) {
                try {
                    extractor::extraction_context ctx{meta.video_id, tasks, seg};
                    const std::string text = annotator().call(extractor::build_extraction_request(ctx));
                    raw.push_back({{"segment", seg.index}, {"text", text}});
                    auto parsed = extractor::parse_annotation_response(text, parse_opts);
                    tasks = extractor::merge_segments(tasks, parsed.tasks);
                    for (std::size_t k = 0; k < parsed.tasks.size(); ++k) {
                        if (!parsed.unknown_fields[k].empty()) {
                            unknown.push_back({{"segment", seg.index},
                                               {"task_id", parsed.tasks[k].task_id},
                                               {"fields", parsed.unknown_fields[k]}});
                        }
                    }
                } catch (const error& e) {
                    if (infrastructure_error(e)) throw;
                    rec["error"] = error_json(e);
                    rec["error"]["segment"] = seg.index;
                    tasks.clear();
                    break;
                }
            }
            json kept = json::array(), reports = json::array();
            const auto checks = extractor::validate_trajectory(tasks, meta.duration);
            for (std::size_t k = 0; k < tasks.size(); ++k) {
                reports.push_back(extractor::to_json(checks[k]));
                if (checks[k].retained()) kept.push_back(guitraj::to_json(tasks[k]));
            }
            rec["tasks"] = std::move(kept);
            rec["reports"] = std::move(reports);
            rec["unknown_fields"] = std::move(unknown);
            rec["responses"] = std::move(raw);
            return rec;
        }, result);
        std::vector<json> trajectories, reports, responses;
        std::size_t segments = 0, total = 0, incomplete = 0, rejected = 0;
        for (const auto& r : done) {
            segments += r["segments"].get<std::size_t>();
            for (const auto& x : r["responses"]) {
                responses.push_back({{"video_id", r["video_id"]}, {"segment", x["segment"]}, {"text", x["text"]}});
            }
            if (!r["error"].is_null()) {
                ++rejected;
                reports.push_back({{"video_id", r["video_id"]}, {"error", r["error"]}});
            }
            for (const auto& rep : r["reports"]) {
                ++total;
                json line = rep;
                line["video_id"] = r["video_id"];
                reports.push_back(std::move(line));
            }
            for (const auto& t : r["tasks"]) {
                if (!t["complete"].get<bool>()) ++incomplete;
                trajectories.push_back({{"video_id", r["video_id"]}, {"duration", r["duration"]}, {"task", t}});
            }
        }
        const fs::path d = dir(stage_id::extract);
        write_file_atomic(d / "trajectories.jsonl", to_jsonl(trajectories));
        write_file_atomic(d / "reports.jsonl", to_jsonl(reports));
        write_file_atomic(d / "responses.jsonl", to_jsonl(responses));
        finish(stage_id::extract, result,
               {{"videos", items.size()},
                {"segments", segments},
                {"tasks", total},
                {"retained", trajectories.size()},
                {"retained_incomplete", incomplete},
                {"dropped", total - trajectories.size()},
                {"rejected_videos", rejected}});
        return result;
    }

    stage_result ground() {
        stage_result result;
        result.stage = stage_id::ground;
        require_upstream(stage_id::ground);
        prepare(stage_id::ground);
        annotator();
        std::vector<item> items;
        std::map<std::string, std::size_t> index;
        for (auto& j : read_jsonl(dir(stage_id::extract) / "trajectories.jsonl")) {
            const std::string vid = j.at("video_id").get<std::string>();
            auto [pos, fresh] = index.emplace(vid, items.size());
            if (fresh) items.push_back({vid, {{"duration", j.at("duration")}, {"tasks", json::array()}}});
            items[pos->second].input["tasks"].push_back(std::move(j.at("task")));
        }
        grounder::directory_frames_options fo;
        fo.extract_command = config.ground.extract_command;
        fo.synthesize = config.ground.synthesize_frames;
        fo.width = static_cast<int>(config.ground.frame_width);
        fo.height = static_cast<int>(config.ground.frame_height);
        auto done = process(stage_id::ground, items, [&](const item& it) {
            grounder::directory_frames frames(config.frames_root(), fo);
            const double duration = it.input["duration"].get<double>();
            json episodes = json::array(), rejected = json::array(), audit = json::array();
            for (const auto& tj : it.input["tasks"]) {
                const task_annotation task = task_annotation_from_json(tj);
                auto g = grounder::ground_trajectory(it.id, task, duration, frames, annotator(), config.ground.frame_offset);
                json actions = json::array();
                for (const auto& a : g.audit) actions.push_back(grounder::to_json(a));
                audit.push_back({{"video_id", it.id}, {"task_id", task.task_id}, {"actions", std::move(actions)}});
                if (g.episode) {
                    episodes.push_back(guitraj::to_json(*g.episode));
                } else {
                    rejected.push_back({{"video_id", it.id}, {"task_id", task.task_id}, {"reason", *g.rejected}});
                }
            }
            return json{{"episodes", std::move(episodes)}, {"rejected", std::move(rejected)}, {"audit", std::move(audit)}};
        }, result);
        std::vector<json> episode_lines, audit_lines, rejected_lines;
        std::vector<grounded_episode> episodes;
        std::size_t grounded = 0, passthrough = 0, discarded = 0, calls = 0;
        for (const auto& r : done) {
            for (const auto& e : r["episodes"]) {
                episode_lines.push_back(e);
                episodes.push_back(grounded_episode_from_json(e));
            }
            for (const auto& x : r["rejected"]) rejected_lines.push_back(x);
            for (const auto& a : r["audit"]) {
                for (const auto& act : a["actions"]) {
                    const std::string disp = act["disposition"];
                    (disp == "grounded" ? grounded : disp == "passthrough" ? passthrough : discarded)++;
                    calls += act["backend_calls"].get<std::size_t>();
                }
                audit_lines.push_back(a);
            }
        }
        const fs::path d = dir(stage_id::ground);
        write_file_atomic(d / "episodes.jsonl", to_jsonl(episode_lines));
        write_file_atomic(d / "audit.jsonl", to_jsonl(audit_lines));
        write_file_atomic(d / "rejected.jsonl", to_jsonl(rejected_lines));
        std::size_t overlays = 0;
        if (config.ground.audit_samples > 0 && result.complete) {
            fs::remove_all(d / "audit");
            const auto picks = grounder::sample_for_audit(episodes, static_cast<std::size_t>(config.ground.audit_samples),
                                                          derive_seed(seed(), "audit"));
            overlays = grounder::write_audit_overlays(episodes, picks, config.frames_root(), d / "audit").size();
        }
        std::size_t complete = 0, steps = 0;
        for (const auto& e : episodes) {
            complete += e.complete ? 1 : 0;
            steps += e.steps.size();
        }
        finish(stage_id::ground, result,
               {{"videos", items.size()},
                {"episodes", episodes.size()},
                {"complete_episodes", complete},
                {"steps", steps},
                {"grounded_actions", grounded},
                {"passthrough_actions", passthrough},
                {"discarded_actions", discarded},
                {"rejected_tasks", rejected_lines.size()},
                {"backend_calls", calls},
                {"audit_overlays", overlays}});
        return result;
    }

    std::vector<grounded_episode> load_episodes() const {
        std::vector<grounded_episode> out;
        for (const auto& j : read_jsonl(dir(stage_id::ground) / "episodes.jsonl")) out.push_back(grounded_episode_from_json(j));
        return out;
    }

    stage_result assemble() {
        stage_result result;
        result.stage = stage_id::assemble;
        require_upstream(stage_id::assemble);
        prepare(stage_id::assemble);
        assembler::export_config ec;
        ec.grounding = config.assemble.grounding;
        ec.action_prediction = config.assemble.action_prediction;
        ec.trajectory_modeling = config.assemble.trajectory_modeling;
        ec.grounding_bbox_weight = config.assemble.grounding_bbox_weight;
        ec.action_thought_weight = config.assemble.action_thought_weight;
        ec.trajectory_thought_weight = config.assemble.trajectory_thought_weight;
        ec.shard_size = static_cast<std::size_t>(config.assemble.shard_size);
        ec.seed = seed();
        ec.validate();
        const auto episodes = load_episodes();
        result.items = 1;
        struct stream {
            task_kind kind;
            bool enabled;
            std::vector<training_sample> (*fn)(const std::vector<grounded_episode>&, const assembler::export_config&);
        };
        const stream streams[] = {
            {task_kind::grounding, ec.grounding, &assembler::export_grounding_samples},
            {task_kind::action_prediction, ec.action_prediction, &assembler::export_action_prediction_samples},
            {task_kind::trajectory_modeling, ec.trajectory_modeling, &assembler::export_trajectory_samples},
        };
        json counts = json::object(), shards = json::object();
        for (const auto& s : streams) {
            const std::string name(task_kind_name(s.kind));
            auto samples = s.enabled ? s.fn(episodes, ec) : std::vector<training_sample>{};
            const auto missing = assembler::missing_images(samples, config.frames_root());
            if (!missing.empty()) {
                throw error(errc::io_error, name + ": " + std::to_string(missing.size()) +
                                                " referenced frames are missing, first " + missing.front());
            }
            counts[name] = samples.size();
            if (!s.enabled) continue;
            auto m = assembler::write_shards(std::move(samples), ec.shard_size, dir(stage_id::assemble) / name,
                                             derive_seed(seed(), name));
            shards[name] = m.shards.size();
        }
        counts["shards"] = std::move(shards);
        counts["episodes"] = episodes.size();
        result.complete = true;
        result.processed = 1;
        result.counts["items"] = {{"export", "complete"}};
        finish(stage_id::assemble, result, counts);
        return result;
    }

    stage_result stats() {
        stage_result result;
        result.stage = stage_id::stats;
        require_upstream(stage_id::stats);
        prepare(stage_id::stats);
        std::optional<stats::category_map> categories;
        if (!config.paths.category_map.empty()) categories = stats::load_category_map(config.paths.category_map);
        const auto report = stats::compute_stats(load_episodes(), categories ? &*categories : nullptr);
        const fs::path d = dir(stage_id::stats);
        write_file_atomic(d / "report.json", stats::render_report(report, stats::format::json));
        write_file_atomic(d / "report.txt", stats::render_report(report, stats::format::text));
        result.items = 1;
        result.processed = 1;
        result.complete = true;
        result.counts["items"] = {{"report", "complete"}};
        finish(stage_id::stats, result,
               {{"episodes", report.episodes}, {"steps", report.steps}, {"frames", report.frames},
                {"environments", report.environments.size()}});
        return result;
    }
};

runner::runner(pipeline_config config, run_options options)
    : config_(std::move(config)), options_(std::move(options)), impl_(std::make_unique<impl>(config_, options_)) {
    validate_config(config_);
}

runner::~runner() = default;

fs::path runner::stage_dir(stage_id s) const { return impl_->dir(s); }

stage_result runner::run_stage(stage_id s) {
    switch (s) {
        case stage_id::filter_meta: return impl_->filter_meta();
        case stage_id::score: return impl_->score();
        case stage_id::extract: return impl_->extract();
        case stage_id::ground: return impl_->ground();
        case stage_id::assemble: return impl_->assemble();
        case stage_id::stats: return impl_->stats();
    }
    throw error(errc::invalid_argument, "unknown stage");
}

std::vector<stage_result> runner::run_all() {
    std::vector<stage_result> out;
    for (stage_id s : all_stages) {
        out.push_back(run_stage(s));
        if (!out.back().ok()) break;
    }
    return out;
}

}  // namespace guitraj::pipeline
