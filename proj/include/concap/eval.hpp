#pragma once

// The four evaluation tasks: entailment AUC, NLE quality, text-to-video
// retrieval mAP, and multiple-choice video QA accuracy.

#include "concap/gateway.hpp"
#include "concap/metrics.hpp"
#include "concap/parallel.hpp"
#include "concap/prompts.hpp"

#include <array>
#include <cstdio>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace concap {

struct RunMetadata {
    std::string backend;
    std::uint64_t seed = 0;
    std::string config_checksum;
};

struct VqaPrediction {
    std::string question_id;
    std::size_t predicted = 0;
    std::size_t answer = 0;
    std::array<double, 5> scores{};
    bool correct() const { return predicted == answer; }
};

struct EvalReport {
    std::string task;
    std::map<std::string, double> metrics;
    std::map<MisalignmentType, double> per_type;                 // entailment
    std::vector<std::pair<std::string, double>> per_query_ap;    // retrieval
    std::vector<VqaPrediction> predictions;                      // vqa
    std::size_t evaluated = 0;
    std::vector<std::pair<std::string, std::string>> excluded;  // (id, reason)
    RunMetadata meta;
};

inline void to_json(json& j, const EvalReport& r) {
    j = json{{"task", r.task}, {"metrics", r.metrics}, {"evaluated", r.evaluated}};
    json ex = json::array();
    for (const auto& [id, why] : r.excluded) ex.push_back({{"id", id}, {"reason", why}});
    j["excluded"] = ex;
    j["excluded_count"] = r.excluded.size();
    if (!r.per_type.empty()) {
        json pt = json::object();
        for (const auto& [m, v] : r.per_type) pt[std::string(to_string(m))] = v;
        j["per_misalignment"] = pt;
    }
    if (!r.per_query_ap.empty()) {
        json q = json::array();
        for (const auto& [id, ap] : r.per_query_ap) q.push_back({{"query_id", id}, {"ap", ap}});
        j["per_query_ap"] = q;
    }
    if (!r.predictions.empty()) {
        json p = json::array();
        for (const auto& v : r.predictions)
            p.push_back({{"question_id", v.question_id},
                         {"predicted_index", v.predicted},
                         {"answer_index", v.answer},
                         {"scores", v.scores},
                         {"correct", v.correct()}});
        j["predictions"] = p;
    }
    j["run"] = {{"backend", r.meta.backend}, {"seed", r.meta.seed}, {"config_checksum", r.meta.config_checksum}};
}

inline std::string render_report(const EvalReport& r) {
    std::ostringstream out;
    char buf[160];
    out << "task: " << r.task << "\n";
    for (const auto& [k, v] : r.metrics) {
        std::snprintf(buf, sizeof buf, "  %-18s %.4f\n", k.c_str(), v);
        out << buf;
    }
    if (!r.per_type.empty()) {
        out << "per misalignment:\n";
        for (const auto& [m, v] : r.per_type) {
            std::snprintf(buf, sizeof buf, "  %-18s %.4f\n", std::string(to_string(m)).c_str(), v);
            out << buf;
        }
    }
    out << "evaluated: " << r.evaluated << ", excluded: " << r.excluded.size() << "\n";
    return out.str();
}

namespace detail {
inline std::string describe(const std::exception_ptr& p) {
    try {
        std::rethrow_exception(p);
    } catch (const std::exception& e) {
        return e.what();
    } catch (...) {
        return "unknown error";
    }
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Entailment

struct EntailmentOptions {
    PerTypePositives per_type = PerTypePositives::paired;
    std::size_t workers = 8;
};

inline EvalReport eval_entailment(const std::vector<EntailmentExample>& examples, const Gateway& gw,
                                  const EntailmentOptions& opt = {}) {
    if (examples.empty()) throw DataError("entailment dataset is empty");
    auto scored = parallel_map(examples.size(), opt.workers, [&](std::size_t i) {
        return p_yes(gw.score_alignment(examples[i].video, examples[i].text));
    });
    EvalReport rep;
    rep.task = "entailment";
    std::vector<EntailmentExample> kept;
    std::vector<double> scores;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (!scored[i].ok()) {
            rep.excluded.emplace_back(examples[i].instance_id, detail::describe(scored[i].error));
            continue;
        }
        kept.push_back(examples[i]);
        scores.push_back(*scored[i].value);
    }
    std::vector<ScoredLabel> sl;
    for (std::size_t i = 0; i < kept.size(); ++i) sl.push_back({scores[i], kept[i].label});
    rep.metrics["roc_auc"] = roc_auc(sl);
    rep.per_type = roc_auc_by_misalignment(kept, scores, opt.per_type);
    rep.evaluated = kept.size();
    return rep;
}

// ---------------------------------------------------------------------------
// NLE

inline EvalReport eval_nle(const std::vector<ContrastRecord>& records, const Gateway& gw, std::size_t workers = 8) {
    struct Row {
        double nli;
        bool judged;
    };
    auto rows = parallel_map(records.size(), workers, [&](std::size_t i) {
        const auto& r = records[i];
        auto predicted = gw.generate_nle(r.video, r.contrast_caption);
        return Row{gw.score_nli(r.nle, predicted), gw.judge_entailment(r.nle, predicted)};
    });
    EvalReport rep;
    rep.task = "nle";
    std::vector<double> nli;
    std::size_t judged = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].ok()) {
            rep.excluded.emplace_back(records[i].instance_id, detail::describe(rows[i].error));
            continue;
        }
        nli.push_back(rows[i].value->nli);
        judged += rows[i].value->judged ? 1 : 0;
    }
    rep.evaluated = nli.size();
    rep.metrics["mean_nli_entailment"] = mean(nli);
    rep.metrics["judge_accuracy"] = nli.empty() ? 0.0 : static_cast<double>(judged) / static_cast<double>(nli.size());
    return rep;
}

// ---------------------------------------------------------------------------
// Retrieval

struct RetrievalQuery {
    std::string query_id;
    std::string text;
    std::vector<std::string> relevant_video_ids;
};

inline void from_json(const json& j, RetrievalQuery& q) {
    detail::require_keys(j, "RetrievalQuery", {"query_id", "text", "relevant_video_ids"});
    q.query_id = detail::get_as<std::string>(j, "query_id", "RetrievalQuery");
    q.text = detail::get_as<std::string>(j, "text", "RetrievalQuery");
    q.relevant_video_ids = detail::get_as<std::vector<std::string>>(j, "relevant_video_ids", "RetrievalQuery");
}

inline void to_json(json& j, const RetrievalQuery& q) {
    j = json{{"query_id", q.query_id}, {"text", q.text}, {"relevant_video_ids", q.relevant_video_ids}};
}

// Descending score, ties by ascending video id.
inline std::vector<std::string> rank_candidates(const std::vector<std::pair<std::string, double>>& scored) {
    auto sorted = scored;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> ids;
    for (auto& [id, _] : sorted) ids.push_back(id);
    return ids;
}

inline EvalReport eval_retrieval(const std::vector<RetrievalQuery>& queries, const std::vector<VideoRef>& candidates,
                                 const Gateway& gw, std::size_t workers = 8) {
    std::set<std::string> ids;
    for (const auto& v : candidates)
        if (!ids.insert(v.video_id).second) throw DataError("duplicate candidate video " + v.video_id);
    for (const auto& q : queries) {
        if (q.relevant_video_ids.empty()) throw DataError("empty-relevant: query " + q.query_id);
        for (const auto& id : q.relevant_video_ids)
            if (!ids.contains(id)) throw DataError("unknown relevant id " + id + " in query " + q.query_id);
    }

    const std::size_t nc = candidates.size();
    auto scores = parallel_map(queries.size() * nc, workers, [&](std::size_t k) {
        return p_yes(gw.score_alignment(candidates[k % nc], queries[k / nc].text));
    });

    EvalReport rep;
    rep.task = "retrieval";
    std::vector<double> aps;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        std::vector<std::pair<std::string, double>> scored;
        std::string failure;
        for (std::size_t c = 0; c < nc && failure.empty(); ++c) {
            const auto& o = scores[qi * nc + c];
            if (!o.ok()) failure = detail::describe(o.error);
            else scored.emplace_back(candidates[c].video_id, *o.value);
        }
        if (!failure.empty()) {
            rep.excluded.emplace_back(queries[qi].query_id, failure);
            continue;
        }
        auto ranking = rank_candidates(scored);
        std::set<std::string> relevant(queries[qi].relevant_video_ids.begin(), queries[qi].relevant_video_ids.end());
        double ap = average_precision(ranking, relevant);
        rep.per_query_ap.emplace_back(queries[qi].query_id, ap);
        aps.push_back(ap);
    }
    rep.evaluated = aps.size();
    rep.metrics["map"] = mean(aps);
    return rep;
}

// ---------------------------------------------------------------------------
// Video QA

struct VqaInstance {
    std::string question_id;
    std::string video_id;
    std::string question;
    std::array<std::string, 5> choices;
    std::size_t answer_index = 0;
};

inline void from_json(const json& j, VqaInstance& v) {
    constexpr std::string_view type = "VqaInstance";
    detail::require_keys(j, type, {"question_id", "video_id", "question", "choices", "answer_index"});
    v.question_id = detail::get_as<std::string>(j, "question_id", type);
    v.video_id = detail::get_as<std::string>(j, "video_id", type);
    v.question = detail::get_as<std::string>(j, "question", type);
    auto choices = detail::get_as<std::vector<std::string>>(j, "choices", type);
    if (choices.size() != 5) throw DataError("VqaInstance: exactly 5 choices required");
    std::copy(choices.begin(), choices.end(), v.choices.begin());
    if (!j.at("answer_index").is_number_integer()) throw DataError("VqaInstance: answer_index must be an integer");
    auto a = j.at("answer_index").get<long long>();
    if (a < 0 || a > 4) throw DataError("VqaInstance: answer_index must lie in [0, 4]");
    v.answer_index = static_cast<std::size_t>(a);
}

inline void to_json(json& j, const VqaInstance& v) {
    j = json{{"question_id", v.question_id}, {"video_id", v.video_id}, {"question", v.question},
             {"choices", v.choices}, {"answer_index", v.answer_index}};
}

// Reads the five "(A) ..." .. "(E) ..." statements of a recast completion.
inline std::array<std::string, 5> parse_recast(std::string_view completion) {
    static const std::regex line_re(R"(^\s*\(([A-Ea-e])\)\s*(.*?)\s*$)");
    std::array<std::string, 5> out;
    std::array<bool, 5> seen{};
    std::size_t found = 0;
    std::string text(completion);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::smatch m;
        if (!std::regex_match(line, m, line_re)) continue;
        auto idx = static_cast<std::size_t>(std::toupper(static_cast<unsigned char>(m[1].str()[0])) - 'A');
        if (seen[idx]) throw DataError("parse-failure: option (" + m[1].str() + ") appears twice");
        if (trim(m[2].str()).empty()) throw DataError("parse-failure: option (" + m[1].str() + ") is empty");
        seen[idx] = true;
        out[idx] = trim(m[2].str());
        ++found;
    }
    if (found != 5) throw DataError("parse-failure: expected 5 statements, found " + std::to_string(found));
    return out;
}

inline std::array<std::string, 5> recast_qa(const std::string& question, const std::array<std::string, 5>& choices,
                                            const Gateway& gw, const GenerationParams& params = {}) {
    return parse_recast(gw.generate(render_recast_prompt(question, choices), params));
}

// Index of the highest score; the lowest index wins ties.
inline std::size_t argmax_first(const std::array<double, 5>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

inline EvalReport eval_vqa(const std::vector<VqaInstance>& instances, const std::map<std::string, VideoRef>& videos,
                           const Gateway& gw, const GenerationParams& params = {}, std::size_t workers = 8) {
    auto rows = parallel_map(instances.size(), workers, [&](std::size_t i) {
        const auto& inst = instances[i];
        auto v = videos.find(inst.video_id);
        if (v == videos.end()) throw DataError("unknown video " + inst.video_id);
        auto statements = recast_qa(inst.question, inst.choices, gw, params);
        VqaPrediction p;
        p.question_id = inst.question_id;
        p.answer = inst.answer_index;
        for (std::size_t k = 0; k < 5; ++k) p.scores[k] = p_yes(gw.score_alignment(v->second, statements[k]));
        p.predicted = argmax_first(p.scores);
        return p;
    });
    EvalReport rep;
    rep.task = "vqa";
    std::size_t correct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].ok()) {
            rep.excluded.emplace_back(instances[i].question_id, detail::describe(rows[i].error));
            continue;
        }
        correct += rows[i].value->correct() ? 1 : 0;
        rep.predictions.push_back(*rows[i].value);
    }
    rep.evaluated = rep.predictions.size();
    rep.metrics["accuracy"] =
        rep.evaluated == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(rep.evaluated);
    return rep;
}

}  // namespace concap
