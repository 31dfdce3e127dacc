// concap: command-line front end for the contrast-caption pipeline and the
// evaluation harness.

#include "concap/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int exit_code(concap::ErrorClass c) {
    switch (c) {
        case concap::ErrorClass::usage:
        case concap::ErrorClass::config: return 1;
        case concap::ErrorClass::data: return 2;
        case concap::ErrorClass::backend: return 3;
    }
    return 2;
}

struct Flags {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> concurrency;
    std::optional<std::string> backend_mode;
    std::optional<std::string> fixtures;
    std::optional<std::string> url;
    std::optional<std::uint64_t> mock_seed;
    std::optional<std::size_t> retain_k;
    std::optional<std::string> human_hard_direction;
    std::optional<std::string> event_gate_policy;
    std::optional<std::string> per_type_positives;
};

concap::PipelineConfig resolve_config(const Flags& f) {
    concap::json doc = concap::json::object();
    if (!f.config_path.empty()) {
        doc = concap::json(concap::load_config(f.config_path));
    }
    std::vector<std::string> sets;
    auto add = [&](const char* key, const auto& v) {
        if (v) sets.push_back(std::string(key) + "=" + concap::json(*v).dump());
    };
    add("seed", f.seed);
    add("concurrency", f.concurrency);
    add("backend.mode", f.backend_mode);
    add("backend.fixtures", f.fixtures);
    add("backend.url", f.url);
    add("backend.seed", f.mock_seed);
    add("thresholds.retain_k", f.retain_k);
    add("human_hard_direction", f.human_hard_direction);
    add("event_gate_policy", f.event_gate_policy);
    add("per_type_positives", f.per_type_positives);
    sets.insert(sets.end(), f.sets.begin(), f.sets.end());
    return concap::config_from_json(concap::apply_overrides(doc, sets));
}

void add_config_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("-c,--config", f.config_path, "pipeline config (JSON)");
    cmd->add_option("--set", f.sets, "override a config key, e.g. --set thresholds.nle_drop_below=0.7");
    cmd->add_option("--seed", f.seed, "global seed");
    cmd->add_option("--concurrency", f.concurrency, "in-flight backend request cap");
    cmd->add_option("--backend", f.backend_mode, "backend mode: mock, scripted, http");
    cmd->add_option("--fixtures", f.fixtures, "fixture file for the scripted backend");
    cmd->add_option("--url", f.url, "base URL of an http backend");
    cmd->add_option("--mock-seed", f.mock_seed, "seed of the mock backend");
    cmd->add_option("--retain-k", f.retain_k, "captions kept per video by select-hard");
    cmd->add_option("--human-hard-direction", f.human_hard_direction, "keep_below or keep_at_or_above");
    cmd->add_option("--event-gate", f.event_gate_policy, "multiple_only or all_challenging");
    cmd->add_option("--per-type-positives", f.per_type_positives, "paired or all");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contrast-caption dataset pipeline and video-language alignment evaluation"};
    app.require_subcommand(1);

    Flags flags;
    concap::StageRequest req;
    std::string input, queries, candidates, videos, manifest;

    for (auto stage : concap::kStages) {
        auto* cmd = app.add_subcommand(std::string(stage));
        add_config_flags(cmd, flags);
        bool is_stats = stage == "stats";
        if (stage != "eval-retrieval") cmd->add_option("-i,--input", input, "input JSONL")->required();
        auto* out = cmd->add_option("-o,--output", req.output,
                                    stage == "build" ? "output directory" : (is_stats ? "stats JSON (optional)" : "output path"));
        if (!is_stats) out->required();
        if (stage == "select-hard") cmd->add_flag("--human-hard", req.human_hard, "filter by a_vle instead of keeping the k lowest");
        if (stage == "build") cmd->add_flag("--shard-by-split", req.shard_by_split, "also write one file per split");
        if (stage == "eval-retrieval") {
            cmd->add_option("--queries", queries, "query JSONL")->required();
            cmd->add_option("--candidates", candidates, "candidate videos (VideoRef JSONL)")->required();
        }
        if (stage == "eval-vqa") cmd->add_option("--videos", videos, "videos (VideoRef JSONL)")->required();
    }
    auto* rerun = app.add_subcommand("rerun", "re-execute the stage recorded in a run manifest");
    rerun->add_option("manifest", manifest, "a <output>.manifest.json file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    auto* chosen = app.get_subcommands().front();
    req.stage = chosen->get_name();
    try {
        concap::StageResult res;
        if (req.stage == "rerun") {
            res = concap::rerun_manifest(manifest);
        } else {
            auto cfg = resolve_config(flags);
            if (!input.empty()) req.inputs["input"] = input;
            if (!queries.empty()) req.inputs["queries"] = queries;
            if (!candidates.empty()) req.inputs["candidates"] = candidates;
            if (!videos.empty()) req.inputs["videos"] = videos;
            res = concap::run_stage(cfg, req);
        }
        if (!res.rendered.empty()) std::cout << res.rendered;
        std::cout << res.counts.dump() << "\n";
        return 0;
    } catch (const concap::Error& e) {
        std::cerr << "concap " << req.stage << ": " << e.what() << "\n";
        return exit_code(e.error_class());
    } catch (const concap::json::exception& e) {
        std::cerr << "concap " << req.stage << ": " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "concap " << req.stage << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "concap " << req.stage << ": " << e.what() << "\n";
        return 2;
    }
}
