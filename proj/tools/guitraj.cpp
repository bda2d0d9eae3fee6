#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "guitraj/error.hpp"
#include "guitraj/pipeline.hpp"

using namespace guitraj;

namespace {

struct flags {
    std::string config;
    bool resume = false;
    std::string stage_dir;
    std::optional<std::int64_t> seed;
    std::optional<std::int64_t> concurrency;
    bool strict_parse = false;
    std::optional<std::size_t> stop_after;
};

void add_flags(CLI::App* cmd, flags& f) {
    cmd->add_option("--config", f.config, "pipeline config file")->required();
    cmd->add_flag("--resume", f.resume, "skip items already complete in the stage directory");
    cmd->add_option("--stage-dir", f.stage_dir, "work directory holding the per-stage outputs");
    cmd->add_option("--seed", f.seed, "override run.seed");
    cmd->add_option("--concurrency", f.concurrency, "override run.concurrency")->check(CLI::PositiveNumber);
    cmd->add_flag("--strict-parse", f.strict_parse, "reject annotation responses with text around the JSON");
    cmd->add_option("--stop-after", f.stop_after, "stop each stage after N items (interruption drill)");
}

void print(const pipeline::stage_result& r) {
    std::printf("%-11s %-8s items=%zu processed=%zu skipped=%zu failed=%zu %s\n",
                std::string(pipeline::stage_name(r.stage)).c_str(),
                r.complete ? "complete" : (r.interrupted ? "stopped" : "partial"), r.items, r.processed, r.skipped,
                r.failed, r.counts.dump().c_str());
    for (const auto& e : r.errors) std::fprintf(stderr, "  %s\n", e.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tutorial-video to GUI-trajectory dataset pipeline"};
    app.require_subcommand(1);
    flags f;
    std::vector<std::pair<CLI::App*, std::optional<pipeline::stage_id>>> commands;
    for (auto s : pipeline::all_stages) {
        auto* cmd = app.add_subcommand(std::string(pipeline::stage_name(s)), "run the " + std::string(pipeline::stage_name(s)) + " stage");
        add_flags(cmd, f);
        commands.push_back({cmd, s});
    }
    auto* all = app.add_subcommand("run-all", "run every stage in order");
    add_flags(all, f);
    commands.push_back({all, std::nullopt});
    CLI11_PARSE(app, argc, argv);

    try {
        pipeline_config config = load_config(f.config);
        if (!f.stage_dir.empty()) config.paths.work_dir = f.stage_dir;
        if (f.seed) config.run.seed = *f.seed;
        if (f.concurrency) config.run.concurrency = *f.concurrency;
        if (f.strict_parse) config.extract.strict_parse = true;
        pipeline::run_options options;
        options.resume = f.resume;
        options.stop_after = f.stop_after;
        pipeline::runner runner(config, options);

        std::vector<pipeline::stage_result> results;
        for (const auto& [cmd, stage] : commands) {
            if (!cmd->parsed()) continue;
            if (stage) {
                results.push_back(runner.run_stage(*stage));
            } else {
                results = runner.run_all();
            }
        }
        bool ok = !results.empty();
        for (const auto& r : results) {
            print(r);
            ok = ok && r.ok();
        }
        if (commands.back().first->parsed() && results.size() != std::size(pipeline::all_stages)) ok = false;
        return ok ? 0 : 1;
    } catch (const error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return pipeline::exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
