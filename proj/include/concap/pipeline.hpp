#pragma once

// Pipeline stages. Each reads JSONL, fans record work out under the gateway
// cap, writes its outputs atomically, and leaves a run manifest beside every
// output: <output>.manifest.json.

#include "concap/config.hpp"
#include "concap/curation.hpp"
#include "concap/dataset.hpp"
#include "concap/eval.hpp"
#include "concap/genfilter.hpp"
#include "concap/parallel.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace concap {

inline constexpr std::array<std::string_view, 11> kStages = {
    "score-temporal", "select-hard", "assign",         "generate",       "filter",   "build",
    "stats",          "eval-entailment", "eval-nle", "eval-retrieval", "eval-vqa"};

// A failure inside a stage, tagged with where it happened. Keeps the error
// class of the underlying failure.
class StageError : public Error {
public:
    StageError(ErrorClass cls, const std::string& stage, const std::string& where, const std::string& what)
        : Error(cls, stage + ": " + (where.empty() ? "" : where + ": ") + what) {}
};

struct StageRequest {
    std::string stage;
    std::map<std::string, std::string> inputs;  // role -> path
    std::string output;
    bool human_hard = false;
    bool shard_by_split = false;
};

inline void to_json(json& j, const StageRequest& r) {
    j = json{{"stage", r.stage},
             {"inputs", r.inputs},
             {"output", r.output},
             {"human_hard", r.human_hard},
             {"shard_by_split", r.shard_by_split}};
}

inline void from_json(const json& j, StageRequest& r) {
    r.stage = j.at("stage").get<std::string>();
    r.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    r.output = j.at("output").get<std::string>();
    r.human_hard = j.value("human_hard", false);
    r.shard_by_split = j.value("shard_by_split", false);
}

struct StageResult {
    json counts = json::object();
    std::vector<DatasetManifest> outputs;
    std::string rendered;  // human-readable summary for the terminal
};

namespace detail {

inline std::string file_checksum(const std::filesystem::path& p) { return sha256_hex(read_file(p)); }

inline ErrorClass class_of(const std::exception_ptr& p) {
    try {
        std::rethrow_exception(p);
    } catch (const Error& e) {
        return e.error_class();
    } catch (...) {
        return ErrorClass::data;
    }
}

// Rethrows the first failed outcome (in input order, so the report does not
// depend on scheduling) with its file and line attached.
template <typename T>
void raise_first_failure(const std::vector<Outcome<T>>& outcomes, const std::string& stage, const std::string& file,
                         const std::vector<std::size_t>& lines) {
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].ok()) continue;
        std::string where = file + ":" + std::to_string(i < lines.size() ? lines[i] : i + 1);
        throw StageError(class_of(outcomes[i].error), stage, where, describe(outcomes[i].error));
    }
}

template <typename T>
std::vector<T> values_of(std::vector<Outcome<T>>& outcomes) {
    std::vector<T> out;
    out.reserve(outcomes.size());
    for (auto& o : outcomes) out.push_back(std::move(*o.value));
    return out;
}

inline const std::string& input(const StageRequest& r, const std::string& role) {
    auto it = r.inputs.find(role);
    if (it == r.inputs.end() || it->second.empty())
        throw Error(ErrorClass::usage, r.stage + ": missing input '" + role + "'");
    return it->second;
}

inline std::optional<Attrition> attrition_from_manifest(const std::filesystem::path& data_path) {
    auto m = data_path;
    m += ".manifest.json";
    if (!std::filesystem::exists(m)) return std::nullopt;
    try {
        auto doc = json::parse(read_file(m));
        if (doc.contains("counts") && doc["counts"].contains("attrition")) return doc["counts"]["attrition"].get<Attrition>();
    } catch (const json::exception& e) {
        throw DataError(m.string() + ": " + e.what());
    }
    return std::nullopt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stages

inline StageResult stage_score_temporal(const PipelineConfig& cfg, const Gateway& gw, const StageRequest& req) {
    const auto& in = detail::input(req, "input");
    std::vector<std::size_t> lines;
    auto corpus = read_jsonl<CaptionInstance>(in, &lines);
    auto scored = parallel_map(corpus.size(), cfg.concurrency, [&](std::size_t i) {
        auto c = corpus[i];
        if (c.video.frames.empty()) throw PreconditionError("video " + c.video.video_id + " has no frames");
        std::vector<double> frame_scores;
        for (const auto& f : c.video.frames) frame_scores.push_back(gw.score_frame_entailment(f, c.caption));
        c.a_vle = video_text_alignment_score(frame_scores);
        c.challenge_flag = *c.a_vle < cfg.thresholds.challenge_threshold;
        return c;
    });
    detail::raise_first_failure(scored, req.stage, in, lines);
    auto out = detail::values_of(scored);

    std::vector<double> a;
    for (const auto& c : out) a.push_back(*c.a_vle);
    StageResult r;
    r.counts = {{"captions", out.size()},
                {"challenging", std::count_if(a.begin(), a.end(), [&](double s) { return s < cfg.thresholds.challenge_threshold; })}};
    r.counts["challenging_fraction"] = a.empty() ? 0.0 : temporal_challenge_stats(a, cfg.thresholds.challenge_threshold);
    r.outputs.push_back(write_jsonl(out, req.output));
    return r;
}

inline StageResult stage_select_hard(const PipelineConfig& cfg, const StageRequest& req) {
    const auto& in = detail::input(req, "input");
    auto corpus = read_jsonl<CaptionInstance>(in);
    StageResult r;
    auto challenging = [&](const std::vector<CaptionInstance>& cs) {
        std::vector<double> a;
        for (const auto& c : cs) {
            if (!c.a_vle) throw DataError("missing-score: caption of video " + c.video.video_id + " has no a_vle");
            a.push_back(*c.a_vle);
        }
        return a.empty() ? 0.0 : temporal_challenge_stats(a, cfg.thresholds.challenge_threshold);
    };
    std::vector<CaptionInstance> kept;
    if (req.human_hard) {
        auto f = filter_human_hard(corpus, cfg.thresholds.human_hard_threshold, cfg.human_hard_direction);
        kept = std::move(f.retained);
        r.counts = {{"input", corpus.size()}, {"retained", kept.size()}, {"discarded", f.discarded}};
    } else {
        kept = select_hard_captions(corpus, cfg.thresholds.retain_k);
        r.counts = {{"input", corpus.size()},
                    {"retained", kept.size()},
                    {"challenging_fraction_before", challenging(corpus)},
                    {"challenging_fraction_after", challenging(kept)}};
    }
    r.outputs.push_back(write_jsonl(kept, req.output));
    return r;
}

inline bool is_challenging(const CaptionInstance& c, double threshold) {
    if (c.challenge_flag) return *c.challenge_flag;
    if (c.a_vle) return *c.a_vle < threshold;
    throw PreconditionError("caption of video " + c.video.video_id + " has neither challenge_flag nor a_vle");
}

inline StageResult stage_assign(const PipelineConfig& cfg, const Gateway& gw, const StageRequest& req) {
    const auto& in = detail::input(req, "input");
    std::vector<std::size_t> lines;
    auto captions = read_jsonl<CaptionInstance>(in, &lines);
    auto assigned = parallel_map(captions.size(), cfg.concurrency, [&](std::size_t i) {
        const auto& c = captions[i];
        AssignmentContext ctx;
        ctx.source = c.video.source;
        ctx.challenge_flag = is_challenging(c, cfg.thresholds.challenge_threshold);
        ctx.event_gate = cfg.event_gate_policy;
        ctx.rng_seed = caption_seed(cfg.seed, c.video.video_id, c.caption);
        ctx.pos_tags = gw.tag_pos(c.caption);
        // The event classifier is consulted only where its answer can matter.
        bool needs_events = ctx.challenge_flag && ctx.source != VideoSource::tempo &&
                            ctx.event_gate == EventGatePolicy::multiple_only && !find_relation_keyword(c.caption) &&
                            !find_count_word(c.caption);
        if (needs_events) ctx.event_class = gw.classify_event_count(c.caption);
        return AssignedCaption{c, assign_misalignment(c.caption, ctx)};
    });
    detail::raise_first_failure(assigned, req.stage, in, lines);
    auto out = detail::values_of(assigned);

    StageResult r;
    json by_type = json::object();
    for (auto m : kAllMisalignments) by_type[std::string(to_string(m))] = 0;
    for (const auto& a : out) by_type[std::string(to_string(a.misalignment))] = by_type[std::string(to_string(a.misalignment))].get<int>() + 1;
    r.counts = {{"captions", out.size()}, {"by_type", by_type}};
    r.outputs.push_back(write_jsonl(out, req.output));
    return r;
}

inline StageResult stage_generate(const PipelineConfig& cfg, const Gateway& gw, const StageRequest& req) {
    const auto& in = detail::input(req, "input");
    std::vector<std::size_t> lines;
    auto assigned = read_jsonl<AssignedCaption>(in, &lines);

    struct Row {
        std::optional<ContrastRecord> record;
        std::string dropped;  // reason when no record
    };
    auto rows = parallel_map(assigned.size(), cfg.concurrency, [&](std::size_t i) {
        const auto& a = assigned[i];
        auto completion = gw.generate(render_prompt(a.misalignment, a.instance.caption), cfg.generation);
        ParsedGeneration p;
        try {
            p = parse_generation(a.misalignment, completion);
        } catch (const ParseError& e) {
            return Row{std::nullopt, "parse_failure"};
        }
        if (normalize_text(p.contrast_caption) == normalize_text(a.instance.caption)) return Row{std::nullopt, "identical"};
        ContrastRecord r;
        r.instance_id = make_instance_id(a.instance.video.video_id, a.instance.caption, a.misalignment);
        r.video = a.instance.video;
        r.caption = a.instance.caption;
        r.contrast_caption = p.contrast_caption;
        r.nle = p.nle;
        r.misalignment = a.misalignment;
        r.source_span = p.source_span;
        r.target_span = p.target_span;
        r.split = a.instance.split;
        validate(r);
        return Row{std::move(r), ""};
    });
    detail::raise_first_failure(rows, req.stage, in, lines);

    std::vector<ContrastRecord> out;
    std::set<std::string> ids;
    std::size_t parse_failures = 0, identical = 0, duplicates = 0;
    for (auto& o : rows) {
        auto& row = *o.value;
        if (!row.record) {
            (row.dropped == "identical" ? identical : parse_failures)++;
            continue;
        }
        if (!ids.insert(row.record->instance_id).second) {
            ++duplicates;
            continue;
        }
        out.push_back(std::move(*row.record));
    }
    StageResult r;
    r.counts = {{"assigned", assigned.size()},
                {"parsed", out.size()},
                {"parse_failures", parse_failures},
                {"identical_dropped", identical},
                {"duplicate_dropped", duplicates}};
    r.outputs.push_back(write_jsonl(out, req.output));
    return r;
}

inline StageResult stage_filter(const PipelineConfig& cfg, const Gateway& gw, const StageRequest& req) {
    const auto& in = detail::input(req, "input");
    std::vector<std::size_t> lines;
    auto records = read_jsonl<ContrastRecord>(in, &lines);
    enum class Verdict { keep, contradiction_dropped, nle_dropped };
    auto judged = parallel_map(records.size(), cfg.concurrency, [&](std::size_t i) {
        auto r = records[i];
        auto c = contrast_contradiction_filter(gw, r.caption, r.contrast_caption, cfg.thresholds.contrast_drop_above);
        r.filter_scores.contrast_nli = c.score;
        if (!c.keep) return std::pair{Verdict::contradiction_dropped, r};
        auto n = nle_faithfulness_filter(gw, r.caption, r.contrast_caption, r.nle, cfg.thresholds.nle_drop_below);
        r.filter_scores.nle_nli = n.score;
        return std::pair{n.keep ? Verdict::keep : Verdict::nle_dropped, r};
    });
    detail::raise_first_failure(judged, req.stage, in, lines);

    Attrition att;
    att.parsed = records.size();
    std::vector<ContrastRecord> kept;
    for (auto& o : judged) {
        auto& [v, r] = *o.value;
        if (v == Verdict::contradiction_dropped) ++att.contradiction_dropped;
        else if (v == Verdict::nle_dropped) ++att.nle_dropped;
        else kept.push_back(std::move(r));
    }
    StageResult res;
    res.counts = {{"input", records.size()}, {"kept", kept.size()}, {"attrition", att}};
    res.outputs.push_back(write_jsonl(kept, req.output));
    return res;
}

inline StageResult stage_build(const StageRequest& req) {
    const auto& in = detail::input(req, "input");
    auto records = read_dataset<ContrastRecord>(in);
    auto attrition = detail::attrition_from_manifest(in);
    std::filesystem::path dir(req.output);

    StageResult r;
    auto examples = to_entailment_examples(records);
    r.outputs.push_back(write_dataset(records, dir / "contrast.jsonl"));
    r.outputs.push_back(write_dataset(examples, dir / "entailment.jsonl"));
    if (req.shard_by_split) {
        for (auto sp : {Split::train, Split::val, Split::test}) {
            std::vector<ContrastRecord> part;
            std::copy_if(records.begin(), records.end(), std::back_inserter(part), [&](const auto& x) { return x.split == sp; });
            auto name = std::string(to_string(sp));
            r.outputs.push_back(write_dataset(part, dir / ("contrast." + name + ".jsonl")));
            r.outputs.push_back(write_dataset(to_entailment_examples(part), dir / ("entailment." + name + ".jsonl")));
        }
    }
    auto stats = dataset_stats(records, attrition);
    auto stats_json = json(stats).dump(2) + "\n";
    atomic_write(dir / "stats.json", stats_json);
    r.outputs.push_back({(dir / "stats.json").string(), 1, sha256_hex(stats_json)});
    r.rendered = render_stats_table(stats);
    atomic_write(dir / "stats.txt", r.rendered);
    r.outputs.push_back({(dir / "stats.txt").string(), 1, sha256_hex(r.rendered)});

    r.counts = {{"records", records.size()}, {"entailment_examples", examples.size()}};
    if (attrition) r.counts["attrition"] = *attrition;
    return r;
}

inline StageResult stage_stats(const StageRequest& req) {
    const auto& in = detail::input(req, "input");
    auto records = read_dataset<ContrastRecord>(in);
    auto stats = dataset_stats(records, detail::attrition_from_manifest(in));
    StageResult r;
    r.rendered = render_stats_table(stats);
    r.counts = {{"records", records.size()}};
    if (!req.output.empty()) {
        auto text = json(stats).dump(2) + "\n";
        atomic_write(req.output, text);
        r.outputs.push_back({req.output, 1, sha256_hex(text)});
    }
    return r;
}

inline StageResult write_report(EvalReport rep, const PipelineConfig& cfg, const Gateway& gw, const StageRequest& req) {
    rep.meta = {gw.identity(), cfg.seed, config_checksum(cfg)};
    StageResult r;
    r.rendered = render_report(rep);
    r.counts = {{"evaluated", rep.evaluated}, {"excluded", rep.excluded.size()}};
    auto text = json(rep).dump(2) + "\n";
    atomic_write(req.output, text);
    r.outputs.push_back({req.output, 1, sha256_hex(text)});
    return r;
}

inline StageResult stage_eval(const PipelineConfig& cfg, const Gateway& gw, const StageRequest& req) {
    if (req.stage == "eval-entailment") {
        auto examples = read_dataset<EntailmentExample>(detail::input(req, "input"));
        return write_report(eval_entailment(examples, gw, {cfg.per_type_positives, cfg.concurrency}), cfg, gw, req);
    }
    if (req.stage == "eval-nle") {
        auto records = read_dataset<ContrastRecord>(detail::input(req, "input"));
        return write_report(eval_nle(records, gw, cfg.concurrency), cfg, gw, req);
    }
    if (req.stage == "eval-retrieval") {
        auto queries = read_jsonl<RetrievalQuery>(detail::input(req, "queries"));
        auto candidates = read_jsonl<VideoRef>(detail::input(req, "candidates"));
        return write_report(eval_retrieval(queries, candidates, gw, cfg.concurrency), cfg, gw, req);
    }
    auto instances = read_jsonl<VqaInstance>(detail::input(req, "input"));
    std::map<std::string, VideoRef> videos;
    for (auto& v : read_jsonl<VideoRef>(detail::input(req, "videos"))) {
        auto id = v.video_id;
        if (!videos.emplace(id, std::move(v)).second) throw DataError("duplicate video " + id);
    }
    return write_report(eval_vqa(instances, videos, gw, cfg.generation, cfg.concurrency), cfg, gw, req);
}

// ---------------------------------------------------------------------------
// Driver

inline bool stage_uses_backend(std::string_view stage) {
    return stage != "select-hard" && stage != "build" && stage != "stats";
}

inline json run_manifest(const PipelineConfig& cfg, const StageRequest& req, const std::string& backend,
                         const json& inputs, const StageResult& res) {
    json outputs = json::array();
    for (const auto& o : res.outputs) outputs.push_back(o);
    return json{{"stage", req.stage},
                {"request", req},
                {"working_directory", std::filesystem::current_path().string()},
                {"config", cfg},
                {"config_checksum", config_checksum(cfg)},
                {"seed", cfg.seed},
                {"backend", backend.empty() ? json(nullptr) : json(backend)},
                {"inputs", inputs},
                {"outputs", outputs},
                {"counts", res.counts}};
}

// Runs one stage and writes a manifest next to each of its outputs. Returns
// the stage result; errors propagate with their class intact.
inline StageResult run_stage(const PipelineConfig& cfg, const StageRequest& req) {
    if (std::find(kStages.begin(), kStages.end(), req.stage) == kStages.end())
        throw Error(ErrorClass::usage, "unknown stage '" + req.stage + "'");
    cfg.validate();
    if (req.output.empty() && req.stage != "stats") throw Error(ErrorClass::usage, req.stage + ": missing output path");

    json inputs = json::array();
    for (const auto& [role, path] : req.inputs) {
        if (!std::filesystem::exists(path)) throw DataError(req.stage + ": input '" + path + "' does not exist");
        inputs.push_back({{"role", role}, {"path", path}, {"sha256", detail::file_checksum(path)}});
    }

    std::unique_ptr<Gateway> gw;
    if (stage_uses_backend(req.stage)) gw = std::make_unique<Gateway>(make_backend(cfg), gateway_options(cfg));

    StageResult res;
    if (req.stage == "score-temporal") res = stage_score_temporal(cfg, *gw, req);
    else if (req.stage == "select-hard") res = stage_select_hard(cfg, req);
    else if (req.stage == "assign") res = stage_assign(cfg, *gw, req);
    else if (req.stage == "generate") res = stage_generate(cfg, *gw, req);
    else if (req.stage == "filter") res = stage_filter(cfg, *gw, req);
    else if (req.stage == "build") res = stage_build(req);
    else if (req.stage == "stats") res = stage_stats(req);
    else res = stage_eval(cfg, *gw, req);

    auto manifest = run_manifest(cfg, req, gw ? gw->identity() : "", inputs, res).dump(2) + "\n";
    for (const auto& o : res.outputs) {
        std::filesystem::path m(o.path);
        m += ".manifest.json";
        atomic_write(m, manifest);
    }
    return res;
}

// Re-executes the stage a manifest describes, from the same working directory.
inline StageResult rerun_manifest(const std::filesystem::path& manifest_path) {
    json m;
    try {
        m = json::parse(read_file(manifest_path));
    } catch (const json::parse_error& e) {
        throw DataError(manifest_path.string() + ": " + e.what());
    }
    auto cfg = config_from_json(m.at("config"));
    auto req = m.at("request").get<StageRequest>();
    auto previous = std::filesystem::current_path();
    std::filesystem::current_path(m.at("working_directory").get<std::string>());
    try {
        auto res = run_stage(cfg, req);
        std::filesystem::current_path(previous);
        return res;
    } catch (...) {
        std::filesystem::current_path(previous);
        throw;
    }
}

}  // namespace concap
